//! Prints one PASS or FAIL line per acceptance criterion and exits non-zero
//! if any fails.

mod common;

use std::time::{Duration, Instant};

use chronoplan::corpus;
use chronoplan::plan::{format_plan, PlanFormat};
use chronoplan::search::{plan_with, Outcome};
use chronoplan::timeline::StateKind;
use chronoplan::trace::{Recorder, Silent};
use chronoplan::validate::validate;
use chronoplan::Decimal;

type Check = Result<String, String>;

fn pinned(exclude: &str, file: &str, makespan: &str) -> Check {
    let p = corpus::reconstruct_zeno_simpletime_p3();
    let mut c = common::config(&p);
    c.exclude = vec![exclude.to_string()];
    let out = plan_with(&p, c, Silent).map_err(|e| e.to_string())?.0;
    let plan = out.plan().ok_or("no plan")?;
    let text = format_plan(plan, PlanFormat::Timed, 1, Decimal::new(0, 0)).map_err(|e| e.to_string())?;
    let expect = corpus::file(file).unwrap();
    let words = |s: &str| s.split_whitespace().map(str::to_string).collect::<Vec<_>>();
    if words(&text) != words(expect) {
        return Err(format!("got\n{text}"));
    }
    Ok(format!("{} lines, maxtime {makespan}, domain mode {}", plan.len(), p.option("mode").unwrap_or("default")))
}

fn no_plan() -> Check {
    let p = corpus::load_variant("zeno-simpletime", "unit-rules", "p3").map_err(|e| e.to_string())?;
    let mut c = common::config(&p);
    c.node_budget = 10_000;
    match plan_with(&p, c, Silent) {
        Ok((Outcome::NoPlan { explored }, _)) => Ok(format!("no plan after {explored} expansions")),
        Ok((Outcome::Found { plan, .. }, _)) => Err(format!("found a plan of length {}", plan.len())),
        Err(e) => Err(e.to_string()),
    }
}

fn economics() -> Check {
    let d = corpus::load_bundled("zeno-simpletime").map_err(|e| e.to_string())?.domain;
    let dur = |op: &str| common::declared_duration(&d, op).ok_or(format!("no constant duration for {op}"));
    let (fly, zoom, refuel) = (dur("fly")?, dur("zoom")?, dur("refuel")?);
    let (a, b) = (fly + refuel, zoom + 2 * refuel);
    if a > b {
        Ok(format!("{fly} + {refuel} = {a} > {zoom} + 2*{refuel} = {b}"))
    } else {
        Err(format!("{a} <= {b}"))
    }
}

fn epsilon() -> Check {
    let mut r = common::rng(1);
    for i in 0..1000 {
        let (plan, scale, eps) = common::random_timed_plan(&mut r);
        common::check_epsilon(&plan, scale, eps).map_err(|e| format!("plan {i}: {e}"))?;
    }
    Ok("1000 plans".into())
}

fn pathfinder() -> Check {
    use chronoplan::pathfinder::{shortest_cost, GraphView};
    let mut r = common::rng(5);
    for i in 0..500 {
        common::check_graph(&mut r).map_err(|e| format!("graph {i}: {e}"))?;
    }
    let d = |s: &str| s.parse::<Decimal>().unwrap();
    let mut g = GraphView::new(4);
    g.add_edge(0, 3, d("82.860"));
    g.add_edge(0, 1, d("0.400"));
    g.add_edge(1, 2, d("0.400"));
    g.add_edge(2, 3, d("0.383"));
    match shortest_cost(&g, 0, 3) {
        Some(c) if c == d("1.183") => Ok("500 graphs; detour 1.183 against direct 82.860".into()),
        other => Err(format!("detour fixture gave {other:?}")),
    }
}

fn pruning() -> Check {
    let mut r = common::rng(11);
    let mut plans = 0;
    for i in 0..100 {
        let (d, p, depth) = common::micro_instance(&mut r);
        plans += common::check_pruning(&d, &p, depth).map_err(|e| format!("instance {i}\n{d}\n{p}\n{e}"))?.0;
    }
    Ok(format!("100 domains, {plans} plans compared"))
}

fn validity() -> Check {
    let mut checked = 0;
    let mut run = |id: &str, p: &chronoplan::model::Problem, budget: u64| -> Result<(), String> {
        let mut c = common::config(p);
        c.node_budget = budget;
        if let Ok((Outcome::Found { plan, .. }, _)) = plan_with(p, c, Silent) {
            let v = validate(p, &plan).map_err(|e| format!("{id}: {e}"))?;
            if !v.is_valid() {
                return Err(format!("{id}: {v:?}"));
            }
            checked += 1;
        }
        Ok(())
    };
    for (id, name, p) in common::corpus_problems() {
        run(&format!("{id}/{name}"), &p, 2_000_000)?;
    }
    let mut r = common::rng(2024);
    let zeno = corpus::entry("zeno-strips").unwrap().domain_text();
    let logistics = corpus::entry("logistics").unwrap().domain_text();
    for i in 0..100 {
        for (dom, prob) in [(zeno, common::zeno_strips_instance(&mut r)), (logistics, common::logistics_instance(&mut r))] {
            let p = corpus::load_texts(dom, &prob).map_err(|e| e.to_string())?;
            run(&format!("generated {i}"), &p, 200_000)?;
        }
    }
    Ok(format!("{checked} plans, zero violations"))
}

fn rule_evolution() -> Check {
    let mut r = common::rng(7);
    let mut compared = 0;
    let mut bad = vec![];
    for i in 0..50 {
        let lens = common::stage_lengths(&common::zeno_strips_instance(&mut r), 200_000);
        if lens.iter().all(Option::is_some) {
            compared += 1;
            let lens: Vec<usize> = lens.into_iter().map(Option::unwrap).collect();
            if lens.windows(2).any(|w| w[1] > w[0]) {
                bad.push(format!("instance {i}: {lens:?}"));
            }
        }
    }
    if bad.is_empty() {
        Ok(format!("{compared} instances non-increasing"))
    } else {
        Err(format!("{} of {compared} instances grow: {}", bad.len(), bad.join("; ")))
    }
}

fn sparse_dense() -> Check {
    let mut n = 0;
    for (id, name, p) in common::corpus_problems() {
        let mut c = common::config(&p);
        c.state = StateKind::Sparse;
        let a = plan_with(&p, c.clone(), Recorder::default()).map_err(|e| e.to_string())?;
        c.state = StateKind::Dense;
        let b = plan_with(&p, c, Recorder::default()).map_err(|e| e.to_string())?;
        if a.0 != b.0 || a.1.events != b.1.events {
            return Err(format!("{id}/{name} differs"));
        }
        n += a.1.events.len();
    }
    Ok(format!("{n} events identical"))
}

fn main() {
    let criteria: [(&str, Option<Duration>, fn() -> Check); 10] = [
        ("pinned fly-only plan", Some(Duration::from_secs(5)), || {
            pinned("zoom", "zeno-simpletime/p3-fly.plan", "440")
        }),
        ("pinned zoom-only plan", Some(Duration::from_secs(5)), || {
            pinned("fly", "zeno-simpletime/p3-zoom.plan", "280")
        }),
        ("no plan under unit-duration rules", Some(Duration::from_secs(10)), no_plan),
        ("duration economics", None, economics),
        ("epsilon and scaling", Some(Duration::from_secs(10)), epsilon),
        ("pathfinder oracle", Some(Duration::from_secs(30)), pathfinder),
        ("pruning soundness oracle", Some(Duration::from_secs(60)), pruning),
        ("end-to-end validity", None, validity),
        ("rule-evolution direction", None, rule_evolution),
        ("sparse/dense equivalence", None, sparse_dense),
    ];
    let mut failed = 0;
    for (name, limit, check) in criteria {
        let t = Instant::now();
        let mut r = check();
        let took = t.elapsed();
        if let (Ok(_), Some(l)) = (&r, limit) {
            if took > l {
                r = Err(format!("took {took:.2?}, limit {l:?}"));
            }
        }
        match r {
            Ok(detail) => println!("PASS {name} ({took:.2?}): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name} ({took:.2?}): {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
