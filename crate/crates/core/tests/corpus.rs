mod common;

use chronoplan::corpus::{self, Expectation, Origin};
use chronoplan::plan::{format_plan, PlanFormat};
use chronoplan::search::{plan_with, Outcome};
use chronoplan::trace::Silent;
use chronoplan::validate::validate;
use chronoplan::Decimal;

fn ws(s: &str) -> Vec<&str> {
    s.split_whitespace().collect()
}

#[test]
fn every_expectation_holds() {
    for e in corpus::manifest().entries {
        let b = corpus::load_bundled(&e.id).unwrap();
        for x in &e.expectations {
            match x {
                Expectation::Counts { sorts, fluents, operators, .. } => {
                    assert_eq!(
                        (b.domain.user_sort_count(), b.domain.fluents.len(), b.domain.operators.len()),
                        (*sorts, *fluents, *operators),
                        "{}",
                        e.id
                    );
                }
                Expectation::Durations { values, .. } => {
                    for (op, v) in values {
                        assert_eq!(common::declared_duration(&b.domain, op), Some(*v), "{}: {op}", e.id);
                    }
                }
                Expectation::Valid { problem, .. } => {
                    let p = b.problem(problem).unwrap();
                    let out = common::solve(p, common::config(p));
                    assert!(validate(p, out.plan().unwrap()).unwrap().is_valid(), "{}/{problem}", e.id);
                }
                Expectation::Plan { problem, exclude, plan, .. } => {
                    let p = b.problem(problem).unwrap();
                    let mut c = common::config(p);
                    c.exclude = exclude.clone();
                    let out = common::solve(p, c);
                    let text = format_plan(out.plan().unwrap(), PlanFormat::Timed, p.scale(), Decimal::new(0, 0)).unwrap();
                    assert_eq!(ws(&text), ws(corpus::file(plan).unwrap()), "{}/{problem}", e.id);
                }
                Expectation::NoPlan { problem, variant, budget, .. } => {
                    let p = corpus::load_variant(&e.id, variant, problem).unwrap();
                    let mut c = common::config(&p);
                    c.node_budget = *budget;
                    assert!(matches!(plan_with(&p, c, Silent), Ok((Outcome::NoPlan { .. }, _))), "{}", e.id);
                }
            }
        }
    }
}

#[test]
fn published_durations_are_pinned() {
    let e = corpus::entry("zeno-simpletime").unwrap();
    let published = e
        .expectations
        .iter()
        .find_map(|x| match x {
            Expectation::Durations { values, origin: Origin::Published } => Some(values.clone()),
            _ => None,
        })
        .unwrap();
    let expect = [("board", 20), ("debark", 30), ("fly", 180), ("zoom", 100), ("refuel", 73)];
    assert_eq!(published, expect.map(|(k, v)| (k.to_string(), v)).into_iter().collect());
}

/// One fly plus one refuel costs more time than one zoom plus two refuels.
#[test]
fn zooming_beats_flying_on_time() {
    let d = corpus::load_bundled("zeno-simpletime").unwrap().domain;
    let dur = |op: &str| common::declared_duration(&d, op).unwrap();
    assert!(dur("fly") + dur("refuel") > dur("zoom") + 2 * dur("refuel"));
    assert_eq!(dur("fly") + dur("refuel"), 253);
    assert_eq!(dur("zoom") + 2 * dur("refuel"), 246);
}

#[test]
fn rule_stages_differ_only_in_rules() {
    let full = corpus::load_bundled("zeno-strips").unwrap().domain;
    let mut counts = vec![];
    for k in 1..=corpus::ZENO_STRIPS_STAGES {
        let d = chronoplan::model::load(&corpus::zeno_strips_stage(k).unwrap()).unwrap();
        assert_eq!(d.operators, full.operators, "stage {k}");
        assert_eq!(d.fluents, full.fluents, "stage {k}");
        counts.push(d.rules.len());
    }
    assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{counts:?}");
}
