//! Resolved formulas and terms. Names are replaced by ids, anchors are
//! pushed down into each read, and macros are already expanded.

use crate::lang::{ArithOp, Aspect, CmpOp};
use crate::model::{FluentId, ResId, SortId, Value};

pub type VarId = u32;
pub type TimeSlot = u32;

/// A timepoint: absolute, or a frame time slot plus an offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Time {
    Abs(i64),
    Rel(TimeSlot, i64),
}

impl Time {
    pub fn shifted(self, k: i64) -> Time {
        match self {
            Time::Abs(a) => Time::Abs(a + k),
            Time::Rel(s, o) => Time::Rel(s, o + k),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Const(Value),
    Var(VarId),
    Fluent {
        fluent: FluentId,
        args: Vec<Term>,
        at: Time,
    },
    Aspect {
        aspect: Aspect,
        res: ResId,
        args: Vec<Term>,
        at: Time,
    },
    Sum {
        var: VarId,
        sort: SortId,
        cond: Box<Formula>,
        term: Box<Term>,
    },
    Arith(ArithOp, Box<Term>, Box<Term>),
    Neg(Box<Term>),
    /// Shortest path cost; `args` are the extra link arguments, then
    /// origin and destination.
    Dist {
        feature: usize,
        args: Vec<Term>,
        at: Time,
    },
    /// Cost to the nearest node satisfying `cond` with `binder` bound to
    /// the candidate; `args` are the extra link arguments and the origin.
    MinDist {
        feature: usize,
        args: Vec<Term>,
        binder: VarId,
        cond: Box<Formula>,
        at: Time,
    },
}

/// Offsets, relative to an interval's time slot, at which its body reads
/// state. A contiguous range is used when nested intervals make the set
/// of exact points awkward to enumerate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Offsets {
    Points(Vec<i64>),
    Range(i64, i64),
}

impl Offsets {
    pub fn min(&self) -> i64 {
        match self {
            Offsets::Points(v) => v.iter().copied().min().unwrap_or(0),
            Offsets::Range(a, _) => *a,
        }
    }

    pub fn max(&self) -> i64 {
        match self {
            Offsets::Points(v) => v.iter().copied().max().unwrap_or(0),
            Offsets::Range(_, b) => *b,
        }
    }

    pub fn for_each(&self, mut f: impl FnMut(i64)) {
        match self {
            Offsets::Points(v) => v.iter().for_each(|&k| f(k)),
            Offsets::Range(a, b) => (*a..=*b).for_each(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    True,
    False,
    /// A boolean-valued term that must equal `true`.
    Atom(Term),
    Cmp(CmpOp, Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Quant {
        forall: bool,
        vars: Vec<(VarId, SortId)>,
        body: Box<Formula>,
    },
    /// Conjunction of `body` over every timepoint in `[lo, hi]`, with the
    /// timepoint stored in `slot`.
    Interval {
        slot: TimeSlot,
        lo: Time,
        hi: Time,
        offsets: Offsets,
        body: Box<Formula>,
    },
    Goal(Box<Formula>),
}

#[derive(Default)]
struct Collect {
    points: Vec<i64>,
    range: Option<(i64, i64)>,
}

impl Collect {
    fn time(&mut self, t: Time, slot: TimeSlot) {
        if let Time::Rel(s, k) = t {
            if s == slot {
                self.points.push(k);
            }
        }
    }

    fn formula(&mut self, f: &Formula, slot: TimeSlot) {
        match f {
            Formula::True | Formula::False | Formula::Goal(_) => {}
            Formula::Atom(t) => self.term(t, slot),
            Formula::Cmp(_, a, b) => {
                self.term(a, slot);
                self.term(b, slot);
            }
            Formula::Not(a) => self.formula(a, slot),
            Formula::And(v) | Formula::Or(v) => v.iter().for_each(|x| self.formula(x, slot)),
            Formula::Implies(a, b) => {
                self.formula(a, slot);
                self.formula(b, slot);
            }
            Formula::Quant { body, .. } => self.formula(body, slot),
            Formula::Interval {
                lo,
                hi,
                offsets,
                body,
                ..
            } => {
                self.formula(body, slot);
                let rel = |t: &Time| match t {
                    Time::Rel(s, k) if *s == slot => Some(*k),
                    _ => None,
                };
                let (a, b) = match (rel(lo), rel(hi)) {
                    (Some(a), Some(b)) => (a, b),
                    (Some(k), None) | (None, Some(k)) => (k, k),
                    (None, None) => return,
                };
                let lo_k = a + offsets.min().min(0);
                let hi_k = b + offsets.max().max(0);
                let (l, h) = self.range.unwrap_or((lo_k, hi_k));
                self.range = Some((l.min(lo_k), h.max(hi_k)));
            }
        }
    }

    fn term(&mut self, t: &Term, slot: TimeSlot) {
        match t {
            Term::Const(_) | Term::Var(_) => {}
            Term::Fluent { args, at, .. } | Term::Aspect { args, at, .. } | Term::Dist { args, at, .. } => {
                self.time(*at, slot);
                args.iter().for_each(|a| self.term(a, slot));
            }
            Term::MinDist { args, cond, at, .. } => {
                self.time(*at, slot);
                args.iter().for_each(|a| self.term(a, slot));
                self.formula(cond, slot);
            }
            Term::Sum { cond, term, .. } => {
                self.formula(cond, slot);
                self.term(term, slot);
            }
            Term::Arith(_, a, b) => {
                self.term(a, slot);
                self.term(b, slot);
            }
            Term::Neg(a) => self.term(a, slot),
        }
    }
}

/// Offsets relative to `slot` at which `f` reads state.
pub fn read_offsets(f: &Formula, slot: TimeSlot) -> Offsets {
    let mut c = Collect::default();
    c.formula(f, slot);
    match c.range {
        Some((a, b)) => {
            let lo = c.points.iter().copied().fold(a, i64::min);
            let hi = c.points.iter().copied().fold(b, i64::max);
            Offsets::Range(lo, hi)
        }
        None => {
            c.points.sort_unstable();
            c.points.dedup();
            Offsets::Points(c.points)
        }
    }
}

/// Offsets relative to `slot` at which `t` reads state.
pub fn term_read_offsets(t: &Term, slot: TimeSlot) -> Offsets {
    let mut c = Collect::default();
    c.term(t, slot);
    c.points.sort_unstable();
    c.points.dedup();
    match c.range {
        Some((a, b)) => Offsets::Range(
            c.points.first().copied().unwrap_or(a).min(a),
            c.points.last().copied().unwrap_or(b).max(b),
        ),
        None => Offsets::Points(c.points),
    }
}

#[derive(Default)]
struct Size {
    vars: usize,
    slots: usize,
}

impl Size {
    fn var(&mut self, v: VarId) {
        self.vars = self.vars.max(v as usize + 1);
    }

    fn time(&mut self, t: Time) {
        if let Time::Rel(s, _) = t {
            self.slots = self.slots.max(s as usize + 1);
        }
    }

    fn formula(&mut self, f: &Formula) {
        match f {
            Formula::True | Formula::False => {}
            Formula::Atom(t) => self.term(t),
            Formula::Cmp(_, a, b) => {
                self.term(a);
                self.term(b);
            }
            Formula::Not(a) | Formula::Goal(a) => self.formula(a),
            Formula::And(v) | Formula::Or(v) => v.iter().for_each(|x| self.formula(x)),
            Formula::Implies(a, b) => {
                self.formula(a);
                self.formula(b);
            }
            Formula::Quant { vars, body, .. } => {
                vars.iter().for_each(|&(v, _)| self.var(v));
                self.formula(body);
            }
            Formula::Interval {
                slot, lo, hi, body, ..
            } => {
                self.slots = self.slots.max(*slot as usize + 1);
                self.time(*lo);
                self.time(*hi);
                self.formula(body);
            }
        }
    }

    fn term(&mut self, t: &Term) {
        match t {
            Term::Const(_) => {}
            Term::Var(v) => self.var(*v),
            Term::Fluent { args, at, .. } | Term::Aspect { args, at, .. } | Term::Dist { args, at, .. } => {
                self.time(*at);
                args.iter().for_each(|a| self.term(a));
            }
            Term::MinDist {
                args,
                binder,
                cond,
                at,
                ..
            } => {
                self.time(*at);
                self.var(*binder);
                args.iter().for_each(|a| self.term(a));
                self.formula(cond);
            }
            Term::Sum { var, cond, term, .. } => {
                self.var(*var);
                self.formula(cond);
                self.term(term);
            }
            Term::Arith(_, a, b) => {
                self.term(a);
                self.term(b);
            }
            Term::Neg(a) => self.term(a),
        }
    }
}

/// Number of variables and time slots a frame needs to evaluate `f`.
pub fn frame_size(f: &Formula) -> (usize, usize) {
    let mut s = Size::default();
    s.formula(f);
    (s.vars, s.slots)
}
