#![allow(dead_code)]

use std::fmt::Write as _;

use chronoplan::corpus;
use chronoplan::model::Problem;
use chronoplan::search::{plan_with, Outcome, SearchConfig};
use chronoplan::trace::Silent;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn problem(id: &str, name: &str) -> Problem {
    corpus::load_entry_problem(id, name).unwrap_or_else(|e| panic!("{id}/{name}: {e}"))
}

pub fn config(p: &Problem) -> SearchConfig {
    SearchConfig::for_problem(p).unwrap()
}

pub fn solve(p: &Problem, c: SearchConfig) -> Outcome {
    plan_with(p, c, Silent).unwrap().0
}

/// Every `(entry, problem)` pair with its main domain.
pub fn corpus_problems() -> Vec<(String, String, Problem)> {
    let mut out = vec![];
    for e in corpus::manifest().entries {
        for n in e.problem_names() {
            out.push((e.id.clone(), n.to_string(), problem(&e.id, n)));
        }
    }
    out
}

/// A zeno-strips problem: persons spread over cities, every person with a
/// goal city, planes with random fuel.
pub fn zeno_strips_instance(r: &mut ChaCha8Rng) -> String {
    let persons = r.gen_range(2..=4);
    let planes = r.gen_range(1..=2);
    let cities = r.gen_range(2..=3);
    let levels = 5;
    let mut s = String::from("#objects ");
    let names = |p: &str, n: usize| (0..n).map(|i| format!("{p}{i}")).collect::<Vec<_>>().join(", ");
    write!(s, "{} : person; {} : aircraft; {} : city; {} : flevel\n", names("person", persons), names("plane", planes), names("city", cities), names("fl", levels)).unwrap();
    let chain: Vec<String> = (0..levels - 1).map(|i| format!("next(fl{i}, fl{})", i + 1)).collect();
    writeln!(s, "#obs [0] {}", chain.join(" & ")).unwrap();
    let mut init = vec![];
    let mut goals = vec![];
    for i in 0..persons {
        let from = r.gen_range(0..cities);
        let mut to = r.gen_range(0..cities - 1);
        if to >= from {
            to += 1;
        }
        init.push(format!("at(person{i}, city{from})"));
        goals.push(format!("at(person{i}, city{to})"));
    }
    for i in 0..planes {
        init.push(format!("at(plane{i}, city{})", r.gen_range(0..cities)));
        init.push(format!("fuel-level(plane{i}, fl{})", r.gen_range(1..levels)));
        if r.gen_bool(0.3) {
            goals.push(format!("at(plane{i}, city{})", r.gen_range(0..cities)));
        }
    }
    writeln!(s, "#obs [0] {}", init.join(" & ")).unwrap();
    goals.shuffle(r);
    writeln!(s, "#goal {}", goals.join(" & ")).unwrap();
    s
}

/// A logistics problem over two or three cities, each with one ordinary
/// location, one airport and one truck.
pub fn logistics_instance(r: &mut ChaCha8Rng) -> String {
    let cities = r.gen_range(2..=3);
    let objs = r.gen_range(1..=2);
    let places: Vec<String> = (0..cities).flat_map(|c| [format!("pos{c}"), format!("airport{c}")]).collect();
    let mut s = String::from("#objects ");
    let list = |p: &str, n: usize| (0..n).map(|i| format!("{p}{i}")).collect::<Vec<_>>().join(", ");
    writeln!(
        s,
        "{} : city; {} : loc; {} : airport; {} : truck; plane0 : plane; {} : obj",
        list("city", cities),
        list("pos", cities),
        list("airport", cities),
        list("truck", cities),
        list("obj", objs)
    )
    .unwrap();
    let mut obs = vec![];
    for c in 0..cities {
        obs.push(format!("city_of(pos{c}) == city{c}"));
        obs.push(format!("city_of(airport{c}) == city{c}"));
        obs.push(format!("at(truck{c}, pos{c})"));
    }
    obs.push(format!("at(plane0, airport{})", r.gen_range(0..cities)));
    let mut goals = vec![];
    for o in 0..objs {
        let from = places.choose(r).unwrap().clone();
        let to = loop {
            let t = places.choose(r).unwrap();
            if *t != from {
                break t.clone();
            }
        };
        obs.push(format!("at(obj{o}, {from})"));
        goals.push(format!("at(obj{o}, {to})"));
    }
    writeln!(s, "#obs [0] {}", obs.join(" & ")).unwrap();
    writeln!(s, "#goal {}", goals.join(" & ")).unwrap();
    s
}

/// Truth value of a closed formula at timepoint `t` (the `t` variable).
pub fn eval_at<V: chronoplan::eval::StateView>(p: &Problem, view: &V, src: &str, t: i64) -> chronoplan::eval::Tv {
    let q = chronoplan::model::compile_query(p, src).unwrap_or_else(|e| panic!("{src}: {e}"));
    assert!(q.free.is_empty(), "{src} has free variables");
    let ev = chronoplan::eval::Evaluator::new(p, view);
    let mut fr = chronoplan::eval::Frame::new(q.nvars, q.ntimes.max(1));
    fr.times[chronoplan::model::RULE_SLOT as usize] = t;
    ev.formula(&q.body, &mut fr).unwrap()
}

pub fn gid(p: &Problem, atom: &str) -> usize {
    let (name, rest) = atom.split_once('(').unwrap_or((atom, ")"));
    let args: Vec<_> = rest
        .trim_end_matches(')')
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|a| p.sorts.object(a).unwrap_or_else(|| panic!("object {a}")))
        .collect();
    let f = p.domain.fluent(name).unwrap_or_else(|| panic!("fluent {name}"));
    p.fluent_gid(f, &args).unwrap()
}

/// Rule templates over the micro-domain fluents. `P` and `Q` are replaced
/// by distinct fluent names.
const RULE_TEMPLATES: [&str; 8] = [
    "[t] !P(obj) & [t+1] P(obj) -> goal(P(obj))",
    "[t] P(obj) & [t+1] !P(obj) -> !goal(P(obj))",
    "[t] P(obj) -> [t+1] P(obj)",
    "[t] !Q(obj) & [t+1] Q(obj) -> [t] P(obj)",
    "goal(P(obj)) & [t] P(obj) -> [t+1] P(obj)",
    "[t] P(obj) -> [t] !Q(obj)",
    "[t] Q(obj) & [t+1] !Q(obj) -> !exists obj2 [ [t] P(obj2) ]",
    "[t+1] P(obj) -> exists obj2 [ [t] Q(obj2) | [t] P(obj) ]",
];

/// A small sequential domain and problem: up to three one-parameter
/// operators over up to four objects, one or two rules from templates.
/// The depth bound keeps the horizon at six or less.
pub fn micro_instance(r: &mut ChaCha8Rng) -> (String, String, usize) {
    let mut max_dur = 1;
    let fluents = ["p", "q", "s"];
    let lit = |r: &mut ChaCha8Rng, var: &str| {
        let f = fluents.choose(r).unwrap();
        if r.gen_bool(0.5) { format!("{f}({var})") } else { format!("!{f}({var})") }
    };
    let mut d = String::from("#option mode sequential\n#sorts obj\n#fluents p(obj), q(obj), s(obj)\n");
    for i in 0..r.gen_range(1..=3) {
        let dur = r.gen_range(1..=2);
        max_dur = max_dur.max(dur);
        writeln!(d, "#operator op{i}(obj) :at t").unwrap();
        if r.gen_bool(0.6) {
            writeln!(d, ":precond [t] {}", lit(r, "obj")).unwrap();
        }
        writeln!(d, ":duration {dur}").unwrap();
        let effs: Vec<String> = (0..r.gen_range(1..=2))
            .map(|_| {
                let f = fluents.choose(r).unwrap();
                format!("[t+{}] {f}(obj) := {}", r.gen_range(1..=dur), r.gen_bool(0.6))
            })
            .collect();
        writeln!(d, ":effects {}", effs.join(", ")).unwrap();
    }
    for i in 0..r.gen_range(1..=2) {
        let mut fs = fluents.to_vec();
        fs.shuffle(r);
        let body = RULE_TEMPLATES.choose(r).unwrap().replace('P', fs[0]).replace('Q', fs[1]);
        writeln!(d, "#control :name \"r{i}\" {body}").unwrap();
    }
    let objects = r.gen_range(2..=4);
    let mut p = format!("#objects {} : obj\n", (0..objects).map(|i| format!("o{i}")).collect::<Vec<_>>().join(", "));
    let init: Vec<String> = (0..objects)
        .flat_map(|o| fluents.map(|f| (f, o)))
        .filter(|_| r.gen_bool(0.25))
        .map(|(f, o)| format!("{f}(o{o})"))
        .collect();
    if !init.is_empty() {
        writeln!(p, "#obs [0] {}", init.join(" & ")).unwrap();
    }
    let goals: Vec<String> = (0..r.gen_range(1..=2))
        .map(|_| {
            let o = format!("o{}", r.gen_range(0..objects));
            lit(r, &o)
        })
        .collect();
    writeln!(p, "#goal {}", goals.join(" & ")).unwrap();
    (d, p, (6 / max_dur).min(5))
}

/// Compare the plans found with rules pruning against the unpruned plans
/// the validator accepts. Returns the number of accepted plans and the
/// number of unpruned plans; `Err` describes the first mismatch.
pub fn check_pruning(domain: &str, problem: &str, depth: usize) -> Result<(usize, usize), String> {
    use chronoplan::plan::{format_plan, PlanFormat};
    use chronoplan::search::Search;
    use std::collections::BTreeSet;
    let p = corpus::load_texts(domain, problem).map_err(|e| format!("load: {e}"))?;
    let show = |pl: &chronoplan::plan::Plan| format_plan(pl, PlanFormat::Timed, 1, chronoplan::Decimal::new(0, 0)).unwrap();
    let run = |rules: bool| {
        let mut c = config(&p);
        c.depth_bound = Some(depth);
        c.rules = rules;
        Search::new(&p, c, Silent).unwrap().enumerate(usize::MAX).map_err(|e| format!("{e}"))
    };
    let pruned: BTreeSet<String> = run(true)?.iter().map(show).collect();
    let mut filtered = BTreeSet::new();
    let all = run(false)?;
    for pl in &all {
        if chronoplan::validate::validate(&p, pl).map_err(|e| format!("{e}"))?.is_valid() {
            filtered.insert(show(pl));
        }
    }
    if pruned == filtered {
        Ok((pruned.len(), all.len()))
    } else {
        let extra: Vec<_> = pruned.difference(&filtered).collect();
        let missing: Vec<_> = filtered.difference(&pruned).collect();
        Err(format!("only with rules: {extra:?}\nonly validated: {missing:?}"))
    }
}

/// First-found plan length for each zeno-strips rule stage, `None` where a
/// stage finds no plan within the budget. Each found plan is validated.
pub fn stage_lengths(problem: &str, budget: u64) -> Vec<Option<usize>> {
    (1..=corpus::ZENO_STRIPS_STAGES)
        .map(|k| {
            let d = corpus::zeno_strips_stage(k).unwrap();
            let p = corpus::load_texts(&d, problem).unwrap();
            let mut c = config(&p);
            c.node_budget = budget;
            match plan_with(&p, c, Silent) {
                Ok((Outcome::Found { plan, .. }, _)) => {
                    let v = chronoplan::validate::validate(&p, &plan).unwrap();
                    assert!(v.is_valid(), "stage {k}: {v:?}\n{problem}");
                    Some(plan.len())
                }
                _ => None,
            }
        })
        .collect()
}

/// A plan of up to twelve steps with ascending starts, several sharing a
/// timepoint, plus a scale and epsilon to print it with.
pub fn random_timed_plan(r: &mut ChaCha8Rng) -> (chronoplan::plan::Plan, i64, chronoplan::Decimal) {
    use chronoplan::plan::{Plan, PlanStep};
    let scale = *[1i64, 10, 1000].choose(r).unwrap();
    let eps = *["0", "0.001", "0.01", "0.25"].choose(r).unwrap();
    let mut t = 0;
    let steps = (0..r.gen_range(0..=12))
        .map(|i| {
            if r.gen_bool(0.6) {
                t += r.gen_range(1..=3 * scale);
            }
            PlanStep {
                start: t,
                action: format!("op{}", i % 3),
                args: (0..r.gen_range(0..3)).map(|k| format!("x{k}")).collect(),
                duration: r.gen_range(1..=5 * scale),
            }
        })
        .collect();
    (Plan { steps }, scale, eps.parse().unwrap())
}

/// Printed starts rise strictly, by at least 0.001, between distinct
/// timepoints, and parsing the text gives back the plan.
pub fn check_epsilon(plan: &chronoplan::plan::Plan, scale: i64, eps: chronoplan::Decimal) -> Result<(), String> {
    use chronoplan::plan::{format_plan, parse_plan, PlanFormat};
    use chronoplan::Decimal;
    let text = format_plan(plan, PlanFormat::Timed, scale, eps).map_err(|e| e.to_string())?;
    let printed: Vec<Decimal> = text
        .lines()
        .filter(|l| !l.starts_with(";;"))
        .map(|l| l.split_once(':').unwrap().0.parse().unwrap())
        .collect();
    let gap = Decimal::new(1, 3);
    for (w, s) in printed.windows(2).zip(plan.steps.windows(2)) {
        let same = s[0].start == s[1].start;
        if same && w[0] != w[1] || !same && w[1].checked_sub(&w[0]).unwrap() < gap {
            return Err(format!("starts {} then {}\n{text}", w[0], w[1]));
        }
    }
    let back = parse_plan(&text, PlanFormat::Timed, scale, eps).map_err(|e| format!("{e}\n{text}"))?;
    if back != *plan {
        return Err(format!("round trip changed the plan\n{text}"));
    }
    Ok(())
}

/// A digraph of up to twelve nodes with three-decimal costs, possibly with
/// parallel edges and self loops.
pub fn random_graph(r: &mut ChaCha8Rng) -> chronoplan::pathfinder::GraphView<chronoplan::Decimal> {
    let n = r.gen_range(1..=12);
    let mut g = chronoplan::pathfinder::GraphView::new(n);
    let density = r.gen_range(0.05..0.5);
    for a in 0..n {
        for b in 0..n {
            for _ in 0..r.gen_range(1..=2) {
                if r.gen_bool(density) {
                    g.add_edge(a, b, chronoplan::Decimal::new(r.gen_range(0..100_000), 3));
                }
            }
        }
    }
    g
}

/// All-pairs costs by Floyd-Warshall.
pub fn floyd_warshall(g: &chronoplan::pathfinder::GraphView<chronoplan::Decimal>) -> Vec<Vec<Option<chronoplan::Decimal>>> {
    let n = g.len();
    let mut d = vec![vec![None; n]; n];
    for (a, row) in d.iter_mut().enumerate() {
        row[a] = Some(chronoplan::Decimal::new(0, 0));
        for &(b, c) in &g.adj[a] {
            if row[b].is_none_or(|old| c < old) {
                row[b] = Some(c);
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(x), Some(y)) = (d[i][k], d[k][j]) {
                    let s = x + y;
                    if d[i][j].is_none_or(|old| s < old) {
                        d[i][j] = Some(s);
                    }
                }
            }
        }
    }
    d
}

/// Compare the pathfinder with Floyd-Warshall and with exhaustive minima
/// over random target sets.
pub fn check_graph(r: &mut ChaCha8Rng) -> Result<(), String> {
    use chronoplan::pathfinder::{all_costs_from, min_cost_to_satisfying, shortest_cost};
    let g = random_graph(r);
    let fw = floyd_warshall(&g);
    let n = g.len();
    for a in 0..n {
        if all_costs_from(&g, a) != fw[a] {
            return Err(format!("costs from {a} differ: {g:?}"));
        }
        for b in 0..n {
            if shortest_cost(&g, a, b) != fw[a][b] {
                return Err(format!("{a} -> {b}: {:?} vs {:?}", shortest_cost(&g, a, b), fw[a][b]));
            }
        }
        let targets: Vec<bool> = (0..n).map(|_| r.gen_bool(0.3)).collect();
        let expect = (0..n).filter(|&b| targets[b]).filter_map(|b| fw[a][b]).min();
        let got = min_cost_to_satisfying(&g, a, |u| targets[u]);
        if got != expect {
            return Err(format!("nearest from {a} to {targets:?}: {got:?} vs {expect:?}"));
        }
    }
    Ok(())
}

/// Declared constant duration of an operator, in domain units.
pub fn declared_duration(d: &chronoplan::model::Domain, op: &str) -> Option<i64> {
    use chronoplan::formula::Term;
    use chronoplan::model::Value;
    match &d.operators[d.operator(op)?].duration {
        None => Some(1),
        Some(Term::Const(Value::Num(n))) => n.to_integer(),
        Some(_) => None,
    }
}
