//! Depth-first forward-chaining search over timed plan prefixes.
//!
//! A node's state is final up to its frozen horizon: later actions start no
//! earlier than the latest start so far, and their effects come strictly
//! after their start. Control rules and pending conditions are evaluated
//! against that frozen view, so a failure there holds for every extension.

use std::sync::Arc;

use crate::eval::{admit, EvalError, Evaluator, Frame, StateView, Tv};
use crate::formula::Formula;
use crate::model::{ground_instances, ObjId, Operator, Problem, Value, When, END_SLOT, RULE_SLOT, START_SLOT};
use crate::plan::{Plan, PlanStep};
use crate::timeline::{StateKind, Timeline, TimelineError};
use crate::trace::{Change, PruneReason, SearchHook, Steer, TraceEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, clap::ValueEnum)]
pub enum Mode {
    /// Each action starts when the previous one ends.
    #[default]
    Sequential,
    /// Actions may start at any start or end timepoint between the latest
    /// start and the latest end of the prefix.
    Concurrent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    pub mode: Mode,
    /// Maximum plan length; `None` means ten times the number of goals.
    pub depth_bound: Option<usize>,
    /// Maximum number of expansion attempts.
    pub node_budget: u64,
    pub state: StateKind,
    /// Operators left out of the search.
    pub exclude: Vec<String>,
    /// Whether control rules prune. Off only for enumeration oracles.
    pub rules: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            mode: Mode::Sequential,
            depth_bound: None,
            node_budget: 2_000_000,
            state: StateKind::Sparse,
            exclude: vec![],
            rules: true,
        }
    }
}

impl SearchConfig {
    /// Defaults overridden by the problem's `mode` and `state` options.
    pub fn for_problem(problem: &Problem) -> Result<Self, SearchError> {
        let mut c = SearchConfig::default();
        match problem.option("mode") {
            None | Some("sequential") => {}
            Some("concurrent") => c.mode = Mode::Concurrent,
            Some(v) => return Err(SearchError::Config(format!("unknown mode `{v}`"))),
        }
        match problem.option("state") {
            None | Some("sparse") => {}
            Some("dense") => c.state = StateKind::Dense,
            Some(v) => return Err(SearchError::Config(format!("unknown state structure `{v}`"))),
        }
        Ok(c)
    }

    pub fn depth_for(&self, problem: &Problem) -> usize {
        self.depth_bound.unwrap_or(10 * problem.goals.len())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Action {
    pub op: usize,
    pub args: Vec<ObjId>,
    pub start: i64,
    pub duration: i64,
}

impl Action {
    pub fn end(&self) -> i64 {
        self.start + self.duration
    }

    pub fn text(&self, problem: &Problem) -> String {
        self.step(problem).text()
    }

    pub fn step(&self, problem: &Problem) -> PlanStep {
        PlanStep {
            start: self.start,
            action: problem.domain.operators[self.op].name.clone(),
            args: self.args.iter().map(|&o| problem.sorts.object_name(o).to_string()).collect(),
            duration: self.duration,
        }
    }
}

pub fn to_plan(problem: &Problem, actions: &[Action]) -> Plan {
    Plan {
        steps: actions.iter().map(|a| a.step(problem)).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SearchError {
    #[error("node budget exhausted after {explored} expansions")]
    BudgetExceeded { explored: u64 },
    #[error("search aborted after {explored} expansions")]
    Aborted { explored: u64 },
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("{0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Found {
        plan: Plan,
        actions: Vec<Action>,
        explored: u64,
    },
    NoPlan {
        explored: u64,
    },
}

impl Outcome {
    pub fn plan(&self) -> Option<&Plan> {
        match self {
            Outcome::Found { plan, .. } => Some(plan),
            Outcome::NoPlan { .. } => None,
        }
    }

    pub fn explored(&self) -> u64 {
        match self {
            Outcome::Found { explored, .. } | Outcome::NoPlan { explored } => *explored,
        }
    }
}

/// A condition of an added action that was not yet decidable.
#[derive(Debug, Clone)]
struct Pending {
    action: usize,
    /// `None` for the precondition, else the prevail index.
    prevail: Option<usize>,
}

#[derive(Debug, Clone)]
struct Node {
    id: u64,
    tl: Timeline,
    actions: Arc<Vec<Action>>,
    latest_start: i64,
    max_end: i64,
    /// Every rule instance at or before this timepoint has been verified.
    cursor: i64,
    pending: Arc<Vec<Pending>>,
}

#[derive(Debug, Clone)]
struct Candidate {
    start: i64,
    op: usize,
    args: Vec<ObjId>,
    precond: Tv,
}

struct Level {
    node: Node,
    cands: Option<Vec<Candidate>>,
    next: usize,
}

fn prune(rule: impl Into<String>, t: i64, binding: Vec<String>) -> PruneReason {
    PruneReason {
        rule: rule.into(),
        t,
        binding,
    }
}

/// Frame for an operator instance.
pub(crate) fn op_frame(op: &Operator, args: &[ObjId], start: i64, end: i64) -> Frame {
    let mut fr = Frame::new(op.nvars, op.ntimes.max(2));
    for (i, &a) in args.iter().enumerate() {
        fr.vals[i] = Some(Value::Obj(a));
    }
    fr.times[START_SLOT as usize] = start;
    fr.times[END_SLOT as usize] = end;
    fr
}

/// Internal duration of an operator instance at `start`, judged on `view`.
pub(crate) fn duration<V: StateView>(
    problem: &Problem,
    view: &V,
    op: &Operator,
    args: &[ObjId],
    start: i64,
) -> Result<Option<i64>, EvalError> {
    let Some(term) = &op.duration else {
        return Ok(Some(1));
    };
    let ev = Evaluator::new(problem, view);
    let mut fr = op_frame(op, args, start, start);
    match ev.term(term, &mut fr)? {
        Some(Value::Num(d)) => {
            let v = d
                .scaled_to_int(problem.scale())
                .map_err(|e| EvalError::NumericOutOfBounds(e.to_string()))?;
            Ok((v >= 1).then_some(v))
        }
        _ => Ok(None),
    }
}

/// Why applying an action's effects failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum ApplyError {
    Timeline(TimelineError),
    OutsideDuration(i64),
    Eval(EvalError),
}

/// Apply an instance's effects and resource events to `tl`, reading
/// effect conditions and values from `before`.
pub(crate) fn apply_action(
    problem: &Problem,
    before: &Timeline,
    tl: &mut Timeline,
    a: &Action,
    owner: usize,
    mut record: Option<&mut Vec<Change>>,
) -> Result<(), ApplyError> {
    let op = &problem.domain.operators[a.op];
    let ev = Evaluator::new(problem, before);
    let mut fr = op_frame(op, &a.args, a.start, a.end());
    let inside = |t: i64| -> Result<i64, ApplyError> {
        if t < a.start + 1 || t > a.end() {
            Err(ApplyError::OutsideDuration(t))
        } else {
            Ok(t)
        }
    };
    let eval_err = ApplyError::Eval;
    for e in &op.effects {
        let sorts: Vec<_> = e.quantified.iter().map(|q| q.1).collect();
        for inst in ground_instances(&problem.sorts, &sorts) {
            for (q, &o) in e.quantified.iter().zip(&inst) {
                fr.vals[q.0 as usize] = Some(Value::Obj(o));
            }
            if let Some(c) = &e.condition {
                if ev.formula(c, &mut fr).map_err(eval_err)? != Tv::True {
                    continue;
                }
            }
            let mut args = vec![];
            for t in &e.args {
                match ev.term(t, &mut fr).map_err(eval_err)? {
                    Some(Value::Obj(o)) => args.push(o),
                    _ => return Err(ApplyError::Eval(EvalError::ArgumentSort(op.name.clone()))),
                }
            }
            let gid = problem
                .fluent_gid(e.fluent, &args)
                .ok_or_else(|| ApplyError::Eval(EvalError::ArgumentSort(op.name.clone())))?;
            let value = ev
                .term(&e.value, &mut fr)
                .map_err(eval_err)?
                .ok_or(ApplyError::Eval(EvalError::UnboundVariable(0)))?;
            let value = admit(problem.fluent_type(gid), value).map_err(eval_err)?;
            let res = match e.when {
                When::At(t) => {
                    let t = inside(ev.time(&fr, t))?;
                    if let Some(r) = record.as_deref_mut() {
                        r.push(Change {
                            fluent: problem.fluent_text(gid),
                            t,
                            value: problem.format_value(value),
                        });
                    }
                    tl.write(gid, t, value)
                }
                When::Over(lo, hi) => {
                    let lo = inside(ev.time(&fr, lo))?;
                    let hi = inside(ev.time(&fr, hi))?;
                    if let Some(r) = record.as_deref_mut() {
                        r.push(Change {
                            fluent: problem.fluent_text(gid),
                            t: lo,
                            value: problem.format_value(value),
                        });
                    }
                    tl.write_interval(gid, lo, hi, value)
                }
            };
            res.map_err(ApplyError::Timeline)?;
        }
        for q in &e.quantified {
            fr.vals[q.0 as usize] = None;
        }
    }
    for r in &op.resources {
        let mut args = vec![];
        for t in &r.args {
            match ev.term(t, &mut fr).map_err(eval_err)? {
                Some(Value::Obj(o)) => args.push(o),
                _ => return Err(ApplyError::Eval(EvalError::ArgumentSort(op.name.clone()))),
            }
        }
        let rid = problem
            .resource_gid(r.res, &args)
            .ok_or_else(|| ApplyError::Eval(EvalError::ArgumentSort(op.name.clone())))?;
        let amount = match ev.term(&r.amount, &mut fr).map_err(eval_err)? {
            Some(Value::Num(n)) => n,
            _ => return Err(ApplyError::Eval(EvalError::UnboundVariable(0))),
        };
        let (lo, hi) = match r.when {
            When::At(t) => {
                let t = inside(ev.time(&fr, t))?;
                (t, t)
            }
            When::Over(lo, hi) => (inside(ev.time(&fr, lo))?, inside(ev.time(&fr, hi))?),
        };
        tl.resource_event(rid, r.kind, lo, hi, amount, owner)
            .map_err(ApplyError::Timeline)?;
    }
    Ok(())
}

pub(crate) fn apply_reason(problem: &Problem, e: &ApplyError, start: i64) -> PruneReason {
    match e {
        ApplyError::Timeline(TimelineError::Conflict { gid, t }) => {
            prune("conflict", *t, vec![problem.fluent_text(*gid)])
        }
        ApplyError::Timeline(TimelineError::ExclusiveOverlap { rid, t }) => {
            prune("exclusive-overlap", *t, vec![problem.resource_text(*rid)])
        }
        ApplyError::Timeline(TimelineError::BoundsViolation { rid, t, .. }) => {
            prune("resource-bounds", *t, vec![problem.resource_text(*rid)])
        }
        ApplyError::Timeline(TimelineError::ResourceConflict { rid, t }) => {
            prune("resource-conflict", *t, vec![problem.resource_text(*rid)])
        }
        ApplyError::Timeline(TimelineError::NegativeAmount { rid, .. }) => {
            prune("negative-amount", start, vec![problem.resource_text(*rid)])
        }
        ApplyError::OutsideDuration(t) => prune("effect-outside-duration", *t, vec![]),
        ApplyError::Eval(e) => prune(format!("evaluation: {e}"), start, vec![]),
    }
}

/// Object bindings for a rule's free variables, as `sort=object` text.
pub(crate) fn binding_text(problem: &Problem, vars: &[(u32, u32)], objs: &[ObjId]) -> Vec<String> {
    vars.iter()
        .zip(objs)
        .map(|(&(_, s), &o)| format!("{}={}", problem.sorts.sort_name(s), problem.sorts.object_name(o)))
        .collect()
}

/// Outcome of checking rule instances over a range of timepoints.
pub(crate) enum RuleCheck {
    /// All instances up to and including this timepoint hold.
    Upto(i64),
    Violated(PruneReason),
}

/// Check every rule at every timepoint in `(after, upto]` on `view`,
/// stopping at the first timepoint that is not yet decided.
pub(crate) fn check_rules<V: StateView>(
    problem: &Problem,
    view: &V,
    after: i64,
    upto: i64,
) -> Result<RuleCheck, EvalError> {
    if upto <= after {
        return Ok(RuleCheck::Upto(after));
    }
    let ev = Evaluator::new(problem, view);
    let mut reached = upto;
    for rule in &problem.domain.rules {
        let sorts: Vec<_> = rule.free.iter().map(|v| v.1).collect();
        let insts = ground_instances(&problem.sorts, &sorts);
        let mut fr = Frame::new(rule.nvars, rule.ntimes.max(1));
        for t in ev.representatives(after + 1, reached, &rule.offsets, false) {
            if t > reached {
                break;
            }
            fr.times[RULE_SLOT as usize] = t;
            let mut undecided = false;
            for inst in &insts {
                for (v, &o) in rule.free.iter().zip(inst) {
                    fr.vals[v.0 as usize] = Some(Value::Obj(o));
                }
                match ev.formula(&rule.body, &mut fr)? {
                    Tv::True => {}
                    Tv::False => {
                        return Ok(RuleCheck::Violated(prune(
                            rule.name.clone(),
                            t,
                            binding_text(problem, &rule.free, inst),
                        )))
                    }
                    Tv::Unknown => undecided = true,
                }
            }
            if undecided {
                reached = t - 1;
                break;
            }
        }
    }
    Ok(RuleCheck::Upto(reached))
}

/// Evaluate an action's precondition or one of its prevail conditions.
pub(crate) fn condition<V: StateView>(
    problem: &Problem,
    view: &V,
    a: &Action,
    prevail: Option<usize>,
) -> Result<Tv, EvalError> {
    let op = &problem.domain.operators[a.op];
    let f: &Formula = match prevail {
        None => match &op.precond {
            Some(f) => f,
            None => return Ok(Tv::True),
        },
        Some(i) => &op.prevail[i],
    };
    let ev = Evaluator::new(problem, view);
    let mut fr = op_frame(op, &a.args, a.start, a.end());
    ev.formula(f, &mut fr)
}

/// Whether every goal holds at `t` on `tl`.
pub fn goals_hold(problem: &Problem, tl: &Timeline, t: i64) -> bool {
    problem.goals.iter().all(|&(gid, v)| tl.value_at(gid, t) == v)
}

pub struct Search<'a, H: SearchHook> {
    problem: &'a Problem,
    config: SearchConfig,
    hook: H,
    allowed: Vec<bool>,
    next_id: u64,
    explored: u64,
}

impl<'a, H: SearchHook> Search<'a, H> {
    pub fn new(problem: &'a Problem, config: SearchConfig, hook: H) -> Result<Self, SearchError> {
        let ops = &problem.domain.operators;
        for name in &config.exclude {
            if !ops.iter().any(|o| &o.name == name) {
                return Err(SearchError::Config(format!("unknown operator `{name}`")));
            }
        }
        if config.node_budget == 0 {
            return Err(SearchError::Config("node budget must be positive".into()));
        }
        let allowed = ops.iter().map(|o| !config.exclude.contains(&o.name)).collect();
        Ok(Search {
            problem,
            config,
            hook,
            allowed,
            next_id: 0,
            explored: 0,
        })
    }

    pub fn hook(&self) -> &H {
        &self.hook
    }

    pub fn into_hook(self) -> H {
        self.hook
    }

    fn fresh_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn root(&mut self) -> Result<Option<Node>, SearchError> {
        let tl = Timeline::new(self.problem, self.config.state);
        let mut node = Node {
            id: self.fresh_id(),
            tl,
            actions: Arc::new(vec![]),
            latest_start: 0,
            max_end: 0,
            cursor: -1,
            pending: Arc::new(vec![]),
        };
        self.hook.event(&TraceEvent::Expanded {
            node: node.id,
            parent: None,
            action: None,
            start: 0,
            delta: vec![],
        });
        if self.config.rules {
            match check_rules(self.problem, &node.tl.frozen(0), -1, 0)? {
                RuleCheck::Upto(c) => node.cursor = c,
                RuleCheck::Violated(_) => return Ok(None),
            }
        }
        Ok(Some(node))
    }

    fn starts(&self, node: &Node) -> Vec<i64> {
        if node.actions.is_empty() {
            return vec![0];
        }
        match self.config.mode {
            Mode::Sequential => vec![node.actions.last().unwrap().end()],
            Mode::Concurrent => {
                let mut v: Vec<i64> = node
                    .actions
                    .iter()
                    .flat_map(|a| [a.start, a.end()])
                    .filter(|&t| node.latest_start <= t && t <= node.max_end)
                    .collect();
                v.sort_unstable();
                v.dedup();
                v
            }
        }
    }

    fn candidates(&self, node: &Node) -> Result<Vec<Candidate>, SearchError> {
        let mut out = vec![];
        for s in self.starts(node) {
            let view = node.tl.frozen(s);
            for (i, op) in self.problem.domain.operators.iter().enumerate() {
                if !self.allowed[i] {
                    continue;
                }
                let sorts: Vec<_> = op.params.iter().map(|p| p.1).collect();
                for args in ground_instances(&self.problem.sorts, &sorts) {
                    // An identical instance at the same timepoint only merges
                    // with the one already in the plan.
                    if node.actions.iter().any(|a| a.op == i && a.start == s && a.args == args) {
                        continue;
                    }
                    let a = Action {
                        op: i,
                        args,
                        start: s,
                        duration: 1,
                    };
                    let tv = condition(self.problem, &view, &a, None)?;
                    if tv != Tv::False {
                        out.push(Candidate {
                            start: s,
                            op: i,
                            args: a.args,
                            precond: tv,
                        });
                    }
                }
            }
        }
        Ok(out)
    }

    /// Child node for a candidate, or the reason it is pruned.
    fn expand(&mut self, parent: &Node, c: &Candidate, delta: &mut Vec<Change>) -> Result<Result<Node, PruneReason>, SearchError> {
        let p = self.problem;
        let op = &p.domain.operators[c.op];
        let Some(d) = duration(p, &parent.tl, op, &c.args, c.start)? else {
            return Ok(Err(prune("duration", c.start, vec![])));
        };
        let a = Action {
            op: c.op,
            args: c.args.clone(),
            start: c.start,
            duration: d,
        };
        let mut tl = parent.tl.clone();
        let owner = parent.actions.len();
        let record = self.hook.wants_delta().then_some(delta);
        if let Err(e) = apply_action(p, &parent.tl, &mut tl, &a, owner, record) {
            return Ok(Err(apply_reason(p, &e, c.start)));
        }
        let latest_start = parent.latest_start.max(a.start);
        let max_end = parent.max_end.max(a.end());
        let frozen = match self.config.mode {
            Mode::Sequential => a.end(),
            Mode::Concurrent => latest_start,
        };
        if let Err(TimelineError::BoundsViolation { rid, t, .. }) = tl.check_resources(0, frozen) {
            return Ok(Err(prune("resource-bounds", t, vec![p.resource_text(rid)])));
        }
        let mut actions = (*parent.actions).clone();
        actions.push(a);
        let mut pending = (*parent.pending).clone();
        if c.precond == Tv::Unknown {
            pending.push(Pending {
                action: owner,
                prevail: None,
            });
        }
        pending.extend((0..op.prevail.len()).map(|i| Pending {
            action: owner,
            prevail: Some(i),
        }));
        let view = tl.frozen(frozen);
        let mut still = vec![];
        for pe in pending {
            let act = &actions[pe.action];
            match condition(p, &view, act, pe.prevail)? {
                Tv::True => {}
                Tv::Unknown => still.push(pe),
                Tv::False => {
                    let what = if pe.prevail.is_some() { "prevail" } else { "precondition" };
                    return Ok(Err(prune(what, act.start, vec![act.text(p)])));
                }
            }
        }
        let mut cursor = parent.cursor;
        if self.config.rules {
            match check_rules(p, &view, parent.cursor, frozen)? {
                RuleCheck::Upto(c) => cursor = c,
                RuleCheck::Violated(r) => return Ok(Err(r)),
            }
        }
        Ok(Ok(Node {
            id: 0,
            tl,
            actions: Arc::new(actions),
            latest_start,
            max_end,
            cursor,
            pending: Arc::new(still),
        }))
    }

    /// Whether the prefix ending at `node` is a complete valid plan.
    fn is_goal(&self, node: &Node) -> Result<bool, SearchError> {
        let p = self.problem;
        let end = node.max_end.max(node.tl.horizon());
        if !goals_hold(p, &node.tl, end) {
            return Ok(false);
        }
        if node.tl.check_resources(0, i64::MAX).is_err() {
            return Ok(false);
        }
        for pe in node.pending.iter() {
            if condition(p, &node.tl, &node.actions[pe.action], pe.prevail)? != Tv::True {
                return Ok(false);
            }
        }
        if self.config.rules {
            if let RuleCheck::Violated(_) = check_rules(p, &node.tl, node.cursor, node.max_end)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// First plan in depth-first order.
    pub fn run(&mut self) -> Result<Outcome, SearchError> {
        let mut found = None;
        self.walk(&mut |acts| {
            found = Some(acts.to_vec());
            false
        })?;
        Ok(match found {
            Some(actions) => Outcome::Found {
                plan: to_plan(self.problem, &actions),
                actions,
                explored: self.explored,
            },
            None => Outcome::NoPlan {
                explored: self.explored,
            },
        })
    }

    /// Every plan within the depth bound, in depth-first order. Prefixes of
    /// a plan are explored further after it is reported.
    pub fn enumerate(&mut self, limit: usize) -> Result<Vec<Plan>, SearchError> {
        let mut plans = vec![];
        let problem = self.problem;
        self.walk(&mut |acts| {
            plans.push(to_plan(problem, acts));
            plans.len() < limit
        })?;
        Ok(plans)
    }

    pub fn explored(&self) -> u64 {
        self.explored
    }

    /// Depth-first walk calling `found` on every goal node; stops when it
    /// returns false.
    fn walk(&mut self, found: &mut dyn FnMut(&[Action]) -> bool) -> Result<(), SearchError> {
        let depth = self.config.depth_for(self.problem);
        let Some(root) = self.root()? else {
            return Ok(());
        };
        let mut path = vec![Level {
            node: root,
            cands: None,
            next: 0,
        }];
        while let Some(top) = path.last_mut() {
            if top.cands.is_none() {
                if self.is_goal(&top.node)? {
                    let n = &top.node;
                    self.hook.event(&TraceEvent::PlanFound {
                        node: n.id,
                        length: n.actions.len(),
                        makespan: n.max_end,
                    });
                    if !found(&n.actions) {
                        return Ok(());
                    }
                }
                let cands = if top.node.actions.len() < depth {
                    self.candidates(&top.node)?
                } else {
                    vec![]
                };
                let top = path.last_mut().unwrap();
                top.cands = Some(cands);
            }
            match self.hook.checkpoint() {
                Steer::Continue => {}
                Steer::Abort => {
                    return Err(SearchError::Aborted {
                        explored: self.explored,
                    })
                }
                Steer::Backtrack(target) => {
                    if let Some(i) = path.iter().position(|l| l.node.id == target) {
                        while path.len() > i + 1 {
                            let l = path.pop().unwrap();
                            self.hook.event(&TraceEvent::Backtrack {
                                node: l.node.id,
                                parent: path.last().map(|p| p.node.id),
                            });
                        }
                    }
                    continue;
                }
            }
            let top = path.last_mut().unwrap();
            let cands = top.cands.as_ref().unwrap();
            if top.next >= cands.len() {
                let l = path.pop().unwrap();
                self.hook.event(&TraceEvent::Backtrack {
                    node: l.node.id,
                    parent: path.last().map(|p| p.node.id),
                });
                continue;
            }
            let c = cands[top.next].clone();
            top.next += 1;
            if self.explored >= self.config.node_budget {
                return Err(SearchError::BudgetExceeded {
                    explored: self.explored,
                });
            }
            self.explored += 1;
            let parent = path.last().unwrap().node.clone();
            let id = self.fresh_id();
            let mut delta = vec![];
            let text = Action {
                op: c.op,
                args: c.args.clone(),
                start: c.start,
                duration: 0,
            }
            .step(self.problem)
            .text();
            match self.expand(&parent, &c, &mut delta)? {
                Ok(mut child) => {
                    child.id = id;
                    self.hook.event(&TraceEvent::Expanded {
                        node: id,
                        parent: Some(parent.id),
                        action: Some(text),
                        start: c.start,
                        delta,
                    });
                    path.push(Level {
                        node: child,
                        cands: None,
                        next: 0,
                    });
                }
                Err(reason) => {
                    self.hook.event(&TraceEvent::Pruned {
                        node: id,
                        parent: parent.id,
                        action: text,
                        start: c.start,
                        reason,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Search with the given configuration and hook.
pub fn plan_with<H: SearchHook>(problem: &Problem, config: SearchConfig, hook: H) -> Result<(Outcome, H), SearchError> {
    let mut s = Search::new(problem, config, hook)?;
    let out = s.run()?;
    Ok((out, s.into_hook()))
}

/// Search with the problem's own options and no tracing.
pub fn plan(problem: &Problem) -> Result<Outcome, SearchError> {
    let config = SearchConfig::for_problem(problem)?;
    Ok(plan_with(problem, config, crate::trace::Silent)?.0)
}
