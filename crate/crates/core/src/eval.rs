//! Three-valued evaluation of compiled formulas over a state view.
//!
//! A view may not know the value of a fluent at some timepoint yet, for
//! example beyond the frozen horizon of a search node. Such reads make the
//! enclosing formula `Unknown` unless the connectives decide it anyway.

use std::cell::RefCell;
use std::collections::HashMap;

use crate::formula::{Formula, Offsets, Term, Time, VarId};
use crate::lang::{ArithOp, Aspect, CmpOp};
use crate::model::{ObjId, Problem, Value, ValueType};
use crate::pathfinder::{self, GraphView};
use crate::Decimal;

/// Kleene truth value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tv {
    False,
    Unknown,
    True,
}

impl Tv {
    pub fn from_bool(b: bool) -> Tv {
        if b {
            Tv::True
        } else {
            Tv::False
        }
    }

    pub fn not(self) -> Tv {
        match self {
            Tv::False => Tv::True,
            Tv::Unknown => Tv::Unknown,
            Tv::True => Tv::False,
        }
    }

    pub fn and(self, o: Tv) -> Tv {
        self.min(o)
    }

    pub fn or(self, o: Tv) -> Tv {
        self.max(o)
    }
}

impl PartialOrd for Tv {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Tv {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let rank = |t: &Tv| match t {
            Tv::False => 0,
            Tv::Unknown => 1,
            Tv::True => 2,
        };
        rank(self).cmp(&rank(other))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("numeric value out of bounds: {0}")]
    NumericOutOfBounds(String),
    #[error("negative edge cost {cost} in `{feature}`")]
    NegativeCost { feature: String, cost: String },
    #[error("unbound variable {0}")]
    UnboundVariable(VarId),
    #[error("`{0}` read with an argument outside its sort")]
    ArgumentSort(String),
}

/// Read access to a state sequence. `None` means not decided yet.
pub trait StateView {
    fn fluent(&self, gid: usize, t: i64) -> Option<Value>;
    /// One of the ledger aspects; `$minimum`/`$maximum` are answered by the evaluator.
    fn aspect(&self, rid: usize, aspect: Aspect, t: i64) -> Option<Decimal>;
    /// Timepoints in `[lo, hi]` at which the state or its knownness may
    /// differ from the previous timepoint, ascending and without duplicates.
    fn change_points(&self, lo: i64, hi: i64) -> Vec<i64>;
}

/// Variable and time-slot bindings.
#[derive(Debug, Clone, Default)]
pub struct Frame {
    pub vals: Vec<Option<Value>>,
    pub times: Vec<i64>,
}

impl Frame {
    pub fn new(nvars: usize, ntimes: usize) -> Self {
        Frame {
            vals: vec![None; nvars],
            times: vec![0; ntimes],
        }
    }
}

type R<T> = Result<T, EvalError>;

fn num_err(e: crate::fixed::FixedError) -> EvalError {
    EvalError::NumericOutOfBounds(e.to_string())
}

pub struct Evaluator<'a, V: StateView> {
    pub problem: &'a Problem,
    pub view: &'a V,
    dist_cache: RefCell<HashMap<(usize, Vec<ObjId>, i64), Option<GraphView<Decimal>>>>,
}

impl<'a, V: StateView> Evaluator<'a, V> {
    pub fn new(problem: &'a Problem, view: &'a V) -> Self {
        Evaluator {
            problem,
            view,
            dist_cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn time(&self, fr: &Frame, t: Time) -> i64 {
        match t {
            Time::Abs(a) => a,
            Time::Rel(s, k) => fr.times[s as usize] + k,
        }
    }

    /// Evaluate `f`. `goal` switches fluent reads to the goal abstraction.
    pub fn formula(&self, f: &Formula, fr: &mut Frame) -> R<Tv> {
        self.formula_in(f, fr, false)
    }

    fn formula_in(&self, f: &Formula, fr: &mut Frame, goal: bool) -> R<Tv> {
        Ok(match f {
            Formula::True => Tv::True,
            Formula::False => Tv::False,
            Formula::Atom(t) => match self.term_in(t, fr, goal)? {
                None => Tv::Unknown,
                Some(v) => Tv::from_bool(v == Value::bool(true)),
            },
            Formula::Cmp(op, a, b) => {
                let (Some(x), Some(y)) = (self.term_in(a, fr, goal)?, self.term_in(b, fr, goal)?) else {
                    return Ok(Tv::Unknown);
                };
                Tv::from_bool(match op {
                    CmpOp::Eq => x == y,
                    CmpOp::Ne => x != y,
                    CmpOp::Lt => x < y,
                    CmpOp::Le => x <= y,
                    CmpOp::Gt => x > y,
                    CmpOp::Ge => x >= y,
                })
            }
            Formula::Not(a) => self.formula_in(a, fr, goal)?.not(),
            Formula::And(v) => {
                let mut acc = Tv::True;
                for x in v {
                    acc = acc.and(self.formula_in(x, fr, goal)?);
                    if acc == Tv::False {
                        break;
                    }
                }
                acc
            }
            Formula::Or(v) => {
                let mut acc = Tv::False;
                for x in v {
                    acc = acc.or(self.formula_in(x, fr, goal)?);
                    if acc == Tv::True {
                        break;
                    }
                }
                acc
            }
            Formula::Implies(a, b) => {
                let l = self.formula_in(a, fr, goal)?;
                if l == Tv::False {
                    Tv::True
                } else {
                    l.not().or(self.formula_in(b, fr, goal)?)
                }
            }
            Formula::Quant { forall, vars, body } => self.quant(*forall, vars, 0, body, fr, goal)?,
            Formula::Interval {
                slot,
                lo,
                hi,
                offsets,
                body,
            } => {
                let lo = self.time(fr, *lo);
                let hi = self.time(fr, *hi);
                let saved = fr.times[*slot as usize];
                let mut acc = Tv::True;
                for t in self.representatives(lo, hi, offsets, goal) {
                    fr.times[*slot as usize] = t;
                    acc = acc.and(self.formula_in(body, fr, goal)?);
                    if acc == Tv::False {
                        break;
                    }
                }
                fr.times[*slot as usize] = saved;
                acc
            }
            Formula::Goal(inner) => {
                Tv::from_bool(self.formula_in(inner, fr, true)? == Tv::True)
            }
        })
    }

    /// Timepoints in `[lo, hi]` that stand for every other one: the body's
    /// reads can only differ from the previous timepoint where a read hits
    /// a change point.
    pub fn representatives(&self, lo: i64, hi: i64, offsets: &Offsets, goal: bool) -> Vec<i64> {
        if lo > hi {
            return vec![];
        }
        if goal {
            return vec![lo];
        }
        let (a, b) = (offsets.min(), offsets.max());
        let mut out = vec![lo];
        if matches!(offsets, Offsets::Points(v) if v.is_empty()) {
            return out;
        }
        for c in self.view.change_points(lo + a + 1, hi + b) {
            offsets.for_each(|k| {
                let t = c - k;
                if t > lo && t <= hi {
                    out.push(t);
                }
            });
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    fn quant(
        &self,
        forall: bool,
        vars: &[(VarId, u32)],
        i: usize,
        body: &Formula,
        fr: &mut Frame,
        goal: bool,
    ) -> R<Tv> {
        if i == vars.len() {
            return self.formula_in(body, fr, goal);
        }
        let (v, sort) = vars[i];
        let (unit, stop) = if forall {
            (Tv::True, Tv::False)
        } else {
            (Tv::False, Tv::True)
        };
        let saved = fr.vals[v as usize];
        let mut acc = unit;
        for &o in self.problem.sorts.members(sort) {
            fr.vals[v as usize] = Some(Value::Obj(o));
            let r = self.quant(forall, vars, i + 1, body, fr, goal)?;
            acc = if forall { acc.and(r) } else { acc.or(r) };
            if acc == stop {
                break;
            }
        }
        fr.vals[v as usize] = saved;
        Ok(acc)
    }

    pub fn term(&self, t: &Term, fr: &mut Frame) -> R<Option<Value>> {
        self.term_in(t, fr, false)
    }

    fn objects(&self, args: &[Term], fr: &mut Frame, goal: bool) -> R<Option<Vec<ObjId>>> {
        let mut out = Vec::with_capacity(args.len());
        for a in args {
            match self.term_in(a, fr, goal)? {
                Some(Value::Obj(o)) => out.push(o),
                Some(Value::Num(_)) => unreachable!("arguments are objects"),
                None => return Ok(None),
            }
        }
        Ok(Some(out))
    }

    fn term_in(&self, t: &Term, fr: &mut Frame, goal: bool) -> R<Option<Value>> {
        Ok(match t {
            Term::Const(v) => Some(*v),
            Term::Var(v) => Some(fr.vals[*v as usize].ok_or(EvalError::UnboundVariable(*v))?),
            Term::Fluent { fluent, args, at } => {
                let Some(objs) = self.objects(args, fr, goal)? else {
                    return Ok(None);
                };
                let decl = &self.problem.domain.fluents[*fluent as usize];
                match self.problem.fluent_gid(*fluent, &objs) {
                    None if decl.value.is_bool() => Some(Value::bool(false)),
                    None => return Err(EvalError::ArgumentSort(decl.name.clone())),
                    Some(gid) if goal => self.problem.goal.value(gid),
                    Some(gid) => self.view.fluent(gid, self.time(fr, *at).max(0)),
                }
            }
            Term::Aspect {
                aspect,
                res,
                args,
                at,
            } => {
                let decl = &self.problem.domain.resources[*res as usize];
                match aspect {
                    Aspect::Minimum => return Ok(Some(Value::Num(decl.domain.lo))),
                    Aspect::Maximum => return Ok(Some(Value::Num(decl.domain.hi))),
                    _ => {}
                }
                if goal {
                    return Ok(None);
                }
                let Some(objs) = self.objects(args, fr, goal)? else {
                    return Ok(None);
                };
                let rid = self
                    .problem
                    .resource_gid(*res, &objs)
                    .ok_or_else(|| EvalError::ArgumentSort(decl.name.clone()))?;
                self.view
                    .aspect(rid, *aspect, self.time(fr, *at).max(0))
                    .map(Value::Num)
            }
            Term::Sum {
                var,
                sort,
                cond,
                term,
            } => {
                let saved = fr.vals[*var as usize];
                let mut total = Decimal::new(0, 0);
                let mut known = true;
                for &o in self.problem.sorts.members(*sort) {
                    fr.vals[*var as usize] = Some(Value::Obj(o));
                    match self.formula_in(cond, fr, goal)? {
                        Tv::False => {}
                        Tv::Unknown => known = false,
                        Tv::True => match self.term_in(term, fr, goal)? {
                            Some(Value::Num(n)) => total = total.checked_add(&n).map_err(num_err)?,
                            _ => known = false,
                        },
                    }
                }
                fr.vals[*var as usize] = saved;
                known.then_some(Value::Num(total))
            }
            Term::Arith(op, a, b) => {
                let (Some(Value::Num(x)), Some(Value::Num(y))) =
                    (self.term_in(a, fr, goal)?, self.term_in(b, fr, goal)?)
                else {
                    return Ok(None);
                };
                let r = match op {
                    ArithOp::Add => x.checked_add(&y),
                    ArithOp::Sub => x.checked_sub(&y),
                    ArithOp::Mul => x.checked_mul(&y),
                    ArithOp::Div => {
                        if y.is_zero() {
                            return Err(EvalError::DivisionByZero);
                        }
                        x.checked_div(&y)
                    }
                };
                Some(Value::Num(r.map_err(num_err)?))
            }
            Term::Neg(a) => match self.term_in(a, fr, goal)? {
                Some(Value::Num(x)) => Some(Value::Num(x.checked_neg().map_err(num_err)?)),
                _ => None,
            },
            Term::Dist { feature, args, at } => {
                if goal {
                    return Ok(None);
                }
                let Some(objs) = self.objects(args, fr, goal)? else {
                    return Ok(None);
                };
                let df = &self.problem.domain.dist[*feature];
                let t = self.time(fr, *at).max(0);
                let (extra, ends) = objs.split_at(df.extra);
                let Some(g) = self.graph(*feature, extra, t)? else {
                    return Ok(None);
                };
                let nodes = self.problem.sorts.members(df.node_sort);
                let idx = |o: ObjId| nodes.iter().position(|&n| n == o);
                let cost = match (idx(ends[0]), idx(ends[1])) {
                    (Some(a), Some(b)) => pathfinder::shortest_cost(&g, a, b),
                    _ => None,
                };
                Some(Value::Num(self.clamp(cost, df.domain.hi)))
            }
            Term::MinDist {
                feature,
                args,
                binder,
                cond,
                at,
            } => {
                if goal {
                    return Ok(None);
                }
                let Some(objs) = self.objects(args, fr, goal)? else {
                    return Ok(None);
                };
                let md = &self.problem.domain.mindist[*feature];
                let df = &self.problem.domain.dist[md.dist];
                let t = self.time(fr, *at).max(0);
                let (extra, from) = objs.split_at(df.extra);
                let Some(g) = self.graph(md.dist, extra, t)? else {
                    return Ok(None);
                };
                let nodes = self.problem.sorts.members(df.node_sort);
                let saved = fr.vals[*binder as usize];
                let mut target = vec![false; nodes.len()];
                let mut unknown = false;
                for (i, &n) in nodes.iter().enumerate() {
                    fr.vals[*binder as usize] = Some(Value::Obj(n));
                    match self.formula_in(cond, fr, goal)? {
                        Tv::True => target[i] = true,
                        Tv::Unknown => unknown = true,
                        Tv::False => {}
                    }
                }
                fr.vals[*binder as usize] = saved;
                if unknown {
                    return Ok(None);
                }
                let cost = nodes
                    .iter()
                    .position(|&n| n == from[0])
                    .and_then(|a| pathfinder::min_cost_to_satisfying(&g, a, |i| target[i]));
                Some(Value::Num(self.clamp(cost, md.domain.hi)))
            }
        })
    }

    fn clamp(&self, cost: Option<Decimal>, max: Decimal) -> Decimal {
        match cost {
            Some(c) if c < max => c,
            _ => max,
        }
    }

    /// The graph a dist feature sees at `t` for fixed extra link arguments,
    /// or `None` if some link or cost is not decided yet.
    fn graph(&self, feature: usize, extra: &[ObjId], t: i64) -> R<Option<GraphView<Decimal>>> {
        let key = (feature, extra.to_vec(), t);
        if let Some(g) = self.dist_cache.borrow().get(&key) {
            return Ok(g.clone());
        }
        let g = self.build_graph(feature, extra, t)?;
        self.dist_cache.borrow_mut().insert(key, g.clone());
        Ok(g)
    }

    fn build_graph(&self, feature: usize, extra: &[ObjId], t: i64) -> R<Option<GraphView<Decimal>>> {
        let df = &self.problem.domain.dist[feature];
        let nodes = self.problem.sorts.members(df.node_sort);
        let mut adj = vec![vec![]; nodes.len()];
        let mut args = extra.to_vec();
        args.extend([0, 0]);
        let n = args.len();
        for (i, &a) in nodes.iter().enumerate() {
            for (j, &b) in nodes.iter().enumerate() {
                args[n - 2] = a;
                args[n - 1] = b;
                let Some(gid) = self.problem.fluent_gid(df.link, &args) else {
                    continue;
                };
                match self.view.fluent(gid, t) {
                    None => return Ok(None),
                    Some(v) if v == Value::bool(true) => {}
                    Some(_) => continue,
                }
                let cost = match df.cost {
                    None => Decimal::new(1, 0),
                    Some(c) => {
                        let cg = self.problem.fluent_gid(c, &args).expect("cost shares link sorts");
                        match self.view.fluent(cg, t) {
                            None => return Ok(None),
                            Some(Value::Num(x)) => x,
                            Some(_) => unreachable!("cost fluents are numeric"),
                        }
                    }
                };
                if cost.is_negative() {
                    return Err(EvalError::NegativeCost {
                        feature: df.name.clone(),
                        cost: cost.to_string(),
                    });
                }
                adj[i].push((j, cost));
            }
        }
        Ok(Some(GraphView { adj }))
    }
}

/// Whether a formula without free variables holds in every goal state.
pub fn goal_entails(problem: &Problem, f: &Formula) -> Result<bool, EvalError> {
    struct Nothing;
    impl StateView for Nothing {
        fn fluent(&self, _: usize, _: i64) -> Option<Value> {
            None
        }
        fn aspect(&self, _: usize, _: Aspect, _: i64) -> Option<Decimal> {
            None
        }
        fn change_points(&self, _: i64, _: i64) -> Vec<i64> {
            vec![]
        }
    }
    let ev = Evaluator::new(problem, &Nothing);
    let (nvars, ntimes) = crate::formula::frame_size(f);
    let mut fr = Frame::new(nvars, ntimes);
    Ok(ev.formula(&Formula::Goal(Box::new(f.clone())), &mut fr)? == Tv::True)
}

/// Check that a value fits a fluent's declared type, rounding numbers to
/// the domain's scale.
pub fn admit(ty: ValueType, v: Value) -> Result<Value, EvalError> {
    match (ty, v) {
        (ValueType::Num(d), Value::Num(n)) => d
            .admit(n)
            .map(Value::Num)
            .map_err(|e| EvalError::NumericOutOfBounds(e.to_string())),
        _ => Ok(v),
    }
}
