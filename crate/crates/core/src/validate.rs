//! Independent plan replay: every condition is checked on the final state
//! sequence, and rules at every timepoint where their reads can change.

use std::collections::BTreeSet;
use std::fmt;

use crate::eval::{admit, EvalError, Evaluator, Frame, Tv};
use crate::model::{ground_instances, ObjId, Problem, Value, When, END_SLOT, RULE_SLOT, START_SLOT};
use crate::plan::{Plan, PlanStep};
use crate::timeline::{Timeline, TimelineError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationKind {
    Duration,
    Conflict,
    Precondition,
    Prevail,
    Resource,
    Rule,
    Goal,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::Duration => "duration",
            ViolationKind::Conflict => "conflict",
            ViolationKind::Precondition => "precondition",
            ViolationKind::Prevail => "prevail",
            ViolationKind::Resource => "resource",
            ViolationKind::Rule => "rule",
            ViolationKind::Goal => "goal",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Action text, rule name, fluent or resource.
    pub subject: String,
    pub t: i64,
    pub binding: Vec<String>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated by {} at {}", self.kind, self.subject, self.t)?;
        if !self.binding.is_empty() {
            write!(f, " with {}", self.binding.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid { makespan: i64 },
    Invalid(Violation),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValidateError {
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("`{name}` takes {expected} arguments, found {found}")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
}

struct Step {
    op: usize,
    args: Vec<ObjId>,
    start: i64,
    end: i64,
    text: String,
}

fn violation(kind: ViolationKind, subject: impl Into<String>, t: i64) -> Violation {
    Violation {
        kind,
        subject: subject.into(),
        t,
        binding: vec![],
    }
}

fn resolve(problem: &Problem, s: &PlanStep) -> Result<(usize, Vec<ObjId>), ValidateError> {
    let op = problem
        .domain
        .operator(&s.action)
        .ok_or_else(|| ValidateError::UnknownAction(s.action.clone()))?;
    let params = &problem.domain.operators[op].params;
    if params.len() != s.args.len() {
        return Err(ValidateError::ArityMismatch {
            name: s.action.clone(),
            expected: params.len(),
            found: s.args.len(),
        });
    }
    let mut args = vec![];
    for (a, (_, sort)) in s.args.iter().zip(params) {
        let o = problem
            .sorts
            .object(a)
            .filter(|&o| problem.sorts.is_member(o, *sort))
            .ok_or_else(|| ValidateError::UnknownObject(a.clone()))?;
        args.push(o);
    }
    Ok((op, args))
}

fn frame(problem: &Problem, st: &Step) -> Frame {
    let op = &problem.domain.operators[st.op];
    let mut fr = Frame::new(op.nvars, op.ntimes.max(2));
    for (i, &a) in st.args.iter().enumerate() {
        fr.vals[i] = Some(Value::Obj(a));
    }
    fr.times[START_SLOT as usize] = st.start;
    fr.times[END_SLOT as usize] = st.end;
    fr
}

fn objects(ev: &Evaluator<'_, Timeline>, terms: &[crate::formula::Term], fr: &mut Frame) -> Result<Option<Vec<ObjId>>, EvalError> {
    let mut v = vec![];
    for t in terms {
        match ev.term(t, fr)? {
            Some(Value::Obj(o)) => v.push(o),
            _ => return Ok(None),
        }
    }
    Ok(Some(v))
}

/// Apply one step's effects; values are read from the state before it.
fn replay(problem: &Problem, tl: &mut Timeline, st: &Step, owner: usize) -> Result<Option<Violation>, ValidateError> {
    let before = tl.clone();
    let ev = Evaluator::new(problem, &before);
    let op = &problem.domain.operators[st.op];
    let mut fr = frame(problem, st);
    let outside = |t: i64| t <= st.start || t > st.end;
    let conflict = |e: TimelineError| -> Violation {
        match e {
            TimelineError::Conflict { gid, t } => violation(ViolationKind::Conflict, problem.fluent_text(gid), t),
            TimelineError::ExclusiveOverlap { rid, t }
            | TimelineError::ResourceConflict { rid, t }
            | TimelineError::BoundsViolation { rid, t, .. } => {
                violation(ViolationKind::Resource, problem.resource_text(rid), t)
            }
            TimelineError::NegativeAmount { rid, .. } => {
                violation(ViolationKind::Resource, problem.resource_text(rid), st.start)
            }
        }
    };
    for e in &op.effects {
        let sorts: Vec<_> = e.quantified.iter().map(|q| q.1).collect();
        for inst in ground_instances(&problem.sorts, &sorts) {
            for (q, &o) in e.quantified.iter().zip(&inst) {
                fr.vals[q.0 as usize] = Some(Value::Obj(o));
            }
            if let Some(c) = &e.condition {
                if ev.formula(c, &mut fr)? != Tv::True {
                    continue;
                }
            }
            let Some(args) = objects(&ev, &e.args, &mut fr)? else {
                return Ok(Some(violation(ViolationKind::Conflict, st.text.clone(), st.start)));
            };
            let Some(gid) = problem.fluent_gid(e.fluent, &args) else {
                return Ok(Some(violation(ViolationKind::Conflict, st.text.clone(), st.start)));
            };
            let Some(v) = ev.term(&e.value, &mut fr)? else {
                return Ok(Some(violation(ViolationKind::Conflict, st.text.clone(), st.start)));
            };
            let v = admit(problem.fluent_type(gid), v)?;
            let r = match e.when {
                When::At(t) => {
                    let t = ev.time(&fr, t);
                    if outside(t) {
                        return Ok(Some(violation(ViolationKind::Duration, st.text.clone(), t)));
                    }
                    tl.write(gid, t, v)
                }
                When::Over(lo, hi) => {
                    let (lo, hi) = (ev.time(&fr, lo), ev.time(&fr, hi));
                    if outside(lo) || outside(hi) {
                        return Ok(Some(violation(ViolationKind::Duration, st.text.clone(), lo)));
                    }
                    tl.write_interval(gid, lo, hi, v)
                }
            };
            if let Err(e) = r {
                return Ok(Some(conflict(e)));
            }
        }
    }
    for r in &op.resources {
        let Some(args) = objects(&ev, &r.args, &mut fr)? else {
            return Ok(Some(violation(ViolationKind::Resource, st.text.clone(), st.start)));
        };
        let Some(rid) = problem.resource_gid(r.res, &args) else {
            return Ok(Some(violation(ViolationKind::Resource, st.text.clone(), st.start)));
        };
        let Some(Value::Num(amount)) = ev.term(&r.amount, &mut fr)? else {
            return Ok(Some(violation(ViolationKind::Resource, st.text.clone(), st.start)));
        };
        let (lo, hi) = match r.when {
            When::At(t) => (ev.time(&fr, t), ev.time(&fr, t)),
            When::Over(lo, hi) => (ev.time(&fr, lo), ev.time(&fr, hi)),
        };
        if outside(lo) || outside(hi) {
            return Ok(Some(violation(ViolationKind::Duration, st.text.clone(), lo)));
        }
        if let Err(e) = tl.resource_event(rid, r.kind, lo, hi, amount, owner) {
            return Ok(Some(conflict(e)));
        }
    }
    Ok(None)
}

/// Replay `plan` from the initial state and report the earliest violation.
pub fn validate(problem: &Problem, plan: &Plan) -> Result<Verdict, ValidateError> {
    let mut order: Vec<&PlanStep> = plan.steps.iter().collect();
    order.sort_by_key(|s| s.start);
    let mut tl = Timeline::new(problem, Default::default());
    let mut steps = vec![];
    for s in order {
        let (op, args) = resolve(problem, s)?;
        let text = s.text();
        let step = Step {
            op,
            args,
            start: s.start,
            end: s.start + s.duration,
            text,
        };
        if s.duration < 1 || s.start < 0 {
            return Ok(Verdict::Invalid(violation(ViolationKind::Duration, step.text, s.start)));
        }
        // The declared duration must match the operator's at invocation.
        if let Some(d) = &problem.domain.operators[op].duration {
            let ev = Evaluator::new(problem, &tl);
            let mut fr = frame(problem, &step);
            let expected = match ev.term(d, &mut fr)? {
                Some(Value::Num(n)) => n.scaled_to_int(problem.scale()).ok(),
                _ => None,
            };
            if expected != Some(s.duration) {
                return Ok(Verdict::Invalid(violation(ViolationKind::Duration, step.text, s.start)));
            }
        } else if s.duration != 1 {
            return Ok(Verdict::Invalid(violation(ViolationKind::Duration, step.text, s.start)));
        }
        if let Some(v) = replay(problem, &mut tl, &step, steps.len())? {
            return Ok(Verdict::Invalid(v));
        }
        steps.push(step);
    }
    let makespan = plan.makespan();
    let mut found: Vec<Violation> = vec![];
    let ev = Evaluator::new(problem, &tl);
    for st in &steps {
        let op = &problem.domain.operators[st.op];
        let mut fr = frame(problem, st);
        if let Some(p) = &op.precond {
            if ev.formula(p, &mut fr)? != Tv::True {
                found.push(violation(ViolationKind::Precondition, st.text.clone(), st.start));
            }
        }
        for p in &op.prevail {
            if ev.formula(p, &mut fr)? != Tv::True {
                found.push(violation(ViolationKind::Prevail, st.text.clone(), st.start + 1));
            }
        }
    }
    if let Err(TimelineError::BoundsViolation { rid, t, .. }) = tl.check_resources(0, i64::MAX) {
        found.push(violation(ViolationKind::Resource, problem.resource_text(rid), t));
    }
    if let Some(v) = rule_violation(problem, &tl, makespan)? {
        found.push(v);
    }
    let end = makespan.max(tl.horizon());
    for &(gid, v) in &problem.goals {
        if tl.value_at(gid, end) != v {
            found.push(violation(ViolationKind::Goal, problem.fluent_text(gid), end));
        }
    }
    Ok(match found.into_iter().min_by_key(|v| (v.t, v.kind)) {
        Some(v) => Verdict::Invalid(v),
        None => Verdict::Valid { makespan },
    })
}

/// Earliest rule instance in `[0, makespan]` that fails on `tl`.
fn rule_violation(problem: &Problem, tl: &Timeline, makespan: i64) -> Result<Option<Violation>, EvalError> {
    let ev = Evaluator::new(problem, tl);
    let changes: Vec<i64> = tl.points(0, i64::MAX).collect();
    let mut best: Option<Violation> = None;
    for rule in &problem.domain.rules {
        // A rule's truth at t can only differ from t-1 when t plus some
        // read offset lands on a change.
        let (lo, hi) = (rule.offsets.min(), rule.offsets.max());
        let mut times = BTreeSet::from([0]);
        for &c in &changes {
            for k in lo..=hi {
                let t = c - k;
                if (0..=makespan).contains(&t) {
                    times.insert(t);
                }
            }
        }
        let sorts: Vec<_> = rule.free.iter().map(|v| v.1).collect();
        let insts = ground_instances(&problem.sorts, &sorts);
        let mut fr = Frame::new(rule.nvars, rule.ntimes.max(1));
        'times: for t in times {
            if best.as_ref().is_some_and(|b| b.t <= t) {
                break;
            }
            fr.times[RULE_SLOT as usize] = t;
            for inst in &insts {
                for (v, &o) in rule.free.iter().zip(inst) {
                    fr.vals[v.0 as usize] = Some(Value::Obj(o));
                }
                if ev.formula(&rule.body, &mut fr)? != Tv::True {
                    let binding = rule
                        .free
                        .iter()
                        .zip(inst)
                        .map(|(&(_, s), &o)| format!("{}={}", problem.sorts.sort_name(s), problem.sorts.object_name(o)))
                        .collect();
                    best = Some(Violation {
                        kind: ViolationKind::Rule,
                        subject: rule.name.clone(),
                        t,
                        binding,
                    });
                    break 'times;
                }
            }
        }
    }
    Ok(best)
}
