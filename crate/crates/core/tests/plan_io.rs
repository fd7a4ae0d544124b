mod common;

use chronoplan::corpus;
use chronoplan::model::Problem;
use chronoplan::plan::{format_plan, format_time, parse_plan, Plan, PlanError, PlanFormat};
use chronoplan::validate::{validate, Verdict, ViolationKind};
use chronoplan::Decimal;
use proptest::prelude::*;

fn zero() -> Decimal {
    Decimal::new(0, 0)
}

fn pinned(name: &str) -> Plan {
    parse_plan(corpus::file(name).unwrap(), PlanFormat::Timed, 1, zero()).unwrap()
}

fn violation(p: &Problem, plan: &Plan) -> chronoplan::validate::Violation {
    match validate(p, plan).unwrap() {
        Verdict::Invalid(v) => v,
        Verdict::Valid { .. } => panic!("accepted:\n{}", format_plan(plan, PlanFormat::Timed, 1, zero()).unwrap()),
    }
}

#[test]
fn pinned_plans_validate_with_their_makespans() {
    let p = corpus::reconstruct_zeno_simpletime_p3();
    assert_eq!(validate(&p, &pinned("zeno-simpletime/p3-fly.plan")).unwrap(), Verdict::Valid { makespan: 440 });
    assert_eq!(validate(&p, &pinned("zeno-simpletime/p3-zoom.plan")).unwrap(), Verdict::Valid { makespan: 280 });
}

#[test]
fn zoom_plan_ends_with_empty_tank() {
    let dom = corpus::entry("zeno-simpletime").unwrap().domain_text();
    let prob = corpus::entry("zeno-simpletime").unwrap().problem_text("p3").unwrap();
    let plan = pinned("zeno-simpletime/p3-zoom.plan");
    let with = |lvl: &str| {
        let text = prob.replace("#goal ", &format!("#goal fuel-level(plane1, {lvl}) & "));
        corpus::load_texts(dom, &text).unwrap()
    };
    assert!(validate(&with("fl0"), &plan).unwrap().is_valid());
    assert_eq!(violation(&with("fl1"), &plan).kind, ViolationKind::Goal);
}

#[test]
fn pinned_text_round_trips() {
    for name in ["zeno-simpletime/p3-fly.plan", "zeno-simpletime/p3-zoom.plan"] {
        let text = corpus::file(name).unwrap();
        assert_eq!(format_plan(&pinned(name), PlanFormat::Timed, 1, zero()).unwrap(), text);
    }
}

#[test]
fn mutations_are_caught() {
    let p = corpus::reconstruct_zeno_simpletime_p3();
    let fly = pinned("zeno-simpletime/p3-fly.plan");

    let mut m = fly.clone();
    m.steps[1].duration = 179;
    assert_eq!(violation(&p, &m).kind, ViolationKind::Duration);

    // Debarking before anyone boarded.
    let mut m = fly.clone();
    m.steps[3].start = 0;
    m.steps.sort_by_key(|s| s.start);
    let v = violation(&p, &m);
    assert_eq!((v.kind, v.t), (ViolationKind::Precondition, 0));
    assert_eq!(v.subject, "(debark person1 plane1 city1)");

    // Flying and zooming the same plane at once.
    let zoom = pinned("zeno-simpletime/p3-zoom.plan");
    let mut m = fly.clone();
    m.steps.insert(2, zoom.steps[1].clone());
    let v = violation(&p, &m);
    assert!(matches!(v.kind, ViolationKind::Conflict | ViolationKind::Resource), "{v}");
    assert!(v.t >= 20, "{v}");

    // Leaving while someone is still boarding.
    let mut m = fly.clone();
    m.steps[1].start = 10;
    assert_eq!(violation(&p, &m).kind, ViolationKind::Prevail);

    // Refuelling a tank that is not empty.
    let mut m = fly.clone();
    m.steps.insert(
        0,
        chronoplan::plan::PlanStep {
            start: 0,
            action: "refuel".into(),
            args: ["plane1", "city0", "fl4", "fl5"].map(String::from).to_vec(),
            duration: 73,
        },
    );
    let v = violation(&p, &m);
    assert_eq!((v.kind, v.subject.as_str()), (ViolationKind::Rule, "refuel-only-when-empty"));

    let mut m = fly.clone();
    m.steps.truncate(4);
    assert_eq!(violation(&p, &m).kind, ViolationKind::Goal);

    let mut m = fly;
    m.steps[0].action = "teleport".into();
    assert!(validate(&p, &m).is_err());
}

#[test]
fn strips_format_uses_unit_durations() {
    let text = "0: (load-truck obj11 truck1 pos1)\n1: (drive-truck truck1 pos1 airport1 city1)\n";
    let plan = parse_plan(text, PlanFormat::Strips, 1, zero()).unwrap();
    assert!(plan.steps.iter().all(|s| s.duration == 1));
    let printed = format_plan(&plan, PlanFormat::Strips, 1, zero()).unwrap();
    assert_eq!(printed, format!("{text};; Plan length 2, maxtime 2\n"));
    assert!(matches!(
        parse_plan("0: (a) [3]\n", PlanFormat::Strips, 1, zero()),
        Err(PlanError::MalformedLine(1))
    ));
}

#[test]
fn scaled_times() {
    assert_eq!(format_time(1183, 1000), "1.183");
    assert_eq!(format_time(82860, 1000), "82.860");
    assert_eq!(format_time(7, 1), "7");
    assert_eq!(format_time(5, 10), "0.5");
    let plan = parse_plan("0.001: (a) [2.5]\n0.001: (b) [1]\n3.502: (c) [0.25]\n", PlanFormat::Timed, 1000, Decimal::new(1, 3)).unwrap();
    assert_eq!(plan.steps.iter().map(|s| s.start).collect::<Vec<_>>(), [0, 0, 3500]);
    assert_eq!(plan.steps[0].duration, 2500);
    assert_eq!(format_plan(&plan, PlanFormat::Timed, 1, zero()), format_plan(&plan, PlanFormat::Timed, 1, zero()));
    assert!(matches!(format_plan(&plan, PlanFormat::Timed, 0, zero()), Err(PlanError::BadScale)));
    assert!(matches!(format_plan(&plan, PlanFormat::Timed, 1, Decimal::new(-1, 3)), Err(PlanError::BadEpsilon)));
    // A time finer than the scale does not parse.
    assert!(parse_plan("0.0005: (a) [1]\n", PlanFormat::Timed, 1000, zero()).is_err());
}

#[test]
fn timed_corpus_plan_prints_with_epsilon() {
    let p = common::problem("zeno-timed", "p1");
    let out = common::solve(&p, common::config(&p));
    let plan = out.plan().unwrap();
    let eps: Decimal = p.option("epsilon").unwrap().parse().unwrap();
    common::check_epsilon(plan, p.scale(), eps).unwrap();
    let text = format_plan(plan, PlanFormat::Timed, p.scale(), eps).unwrap();
    assert!(text.lines().next().unwrap().starts_with("0.001: "), "{text}");
    let back = parse_plan(&text, PlanFormat::Timed, p.scale(), eps).unwrap();
    assert!(validate(&p, &back).unwrap().is_valid());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn epsilon_keeps_starts_apart(seed in any::<u64>()) {
        let (plan, scale, eps) = common::random_timed_plan(&mut common::rng(seed));
        common::check_epsilon(&plan, scale, eps).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn strips_round_trip(seed in any::<u64>()) {
        let (mut plan, _, _) = common::random_timed_plan(&mut common::rng(seed));
        for s in &mut plan.steps {
            s.duration = 1;
        }
        let text = format_plan(&plan, PlanFormat::Strips, 1, zero()).unwrap();
        prop_assert_eq!(parse_plan(&text, PlanFormat::Strips, 1, zero()).unwrap(), plan);
    }
}
