//! State sequences over integer time with inertia, plus resource ledgers.
//!
//! A [`Timeline`] is a persistent value: cloning it is cheap and shares
//! all per-fluent storage, which is copied only when written.

mod ledger;
mod store;

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::eval::StateView;
use crate::lang::{Aspect, ResourceKind};
use crate::model::{Problem, Value};
use crate::Decimal;

use ledger::{Borrow, Ledger};
pub use store::{Change, ChangeKind};
use store::{ChangeStore, Dense, Sparse};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum StateKind {
    #[default]
    Sparse,
    Dense,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TimelineError {
    #[error("conflicting writes to fluent {gid} at {t}")]
    Conflict { gid: usize, t: i64 },
    #[error("resource {rid} has {available} available at {t}, outside its bounds")]
    BoundsViolation { rid: usize, t: i64, available: Decimal },
    #[error("overlapping exclusive borrows of resource {rid} at {t}")]
    ExclusiveOverlap { rid: usize, t: i64 },
    #[error("conflicting resource updates of resource {rid} at {t}")]
    ResourceConflict { rid: usize, t: i64 },
    #[error("negative amount {amount} for resource {rid}")]
    NegativeAmount { rid: usize, amount: Decimal },
}

#[derive(Debug, Clone)]
enum Store {
    Sparse(Sparse),
    Dense(Dense),
}

impl Store {
    fn get(&self) -> &dyn ChangeStore {
        match self {
            Store::Sparse(s) => s,
            Store::Dense(d) => d,
        }
    }

    fn get_mut(&mut self) -> &mut dyn ChangeStore {
        match self {
            Store::Sparse(s) => s,
            Store::Dense(d) => d,
        }
    }
}

/// A closed interval over which an interval effect pins a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Hold {
    lo: i64,
    hi: i64,
    value: Value,
}

#[derive(Debug, Clone)]
pub struct Timeline {
    store: Store,
    holds: Vec<Option<Arc<Vec<Hold>>>>,
    ledgers: Vec<Arc<Ledger>>,
    bounds: Arc<Vec<(Decimal, Decimal)>>,
    points: Arc<BTreeSet<i64>>,
    horizon: i64,
}

impl Timeline {
    pub fn new(problem: &Problem, kind: StateKind) -> Self {
        Self::from_parts(
            &problem.init,
            &problem.resource_init,
            (0..problem.resource_init.len())
                .map(|rid| {
                    let (r, _) = problem.decode_resource(rid);
                    let d = problem.domain.resources[r as usize].domain;
                    (d.lo, d.hi)
                })
                .collect(),
            kind,
        )
    }

    /// A timeline over bare initial values, for use without a problem.
    pub fn from_parts(
        init: &[Value],
        resource_init: &[Decimal],
        bounds: Vec<(Decimal, Decimal)>,
        kind: StateKind,
    ) -> Self {
        Timeline {
            store: match kind {
                StateKind::Sparse => Store::Sparse(Sparse::new(init)),
                StateKind::Dense => Store::Dense(Dense::new(init)),
            },
            holds: vec![None; init.len()],
            ledgers: resource_init.iter().map(|&v| Arc::new(Ledger::new(v))).collect(),
            bounds: Arc::new(bounds),
            points: Arc::new(BTreeSet::new()),
            horizon: 0,
        }
    }

    pub fn kind(&self) -> StateKind {
        match self.store {
            Store::Sparse(_) => StateKind::Sparse,
            Store::Dense(_) => StateKind::Dense,
        }
    }

    /// Latest timepoint written so far.
    pub fn horizon(&self) -> i64 {
        self.horizon
    }

    pub fn fluent_count(&self) -> usize {
        self.holds.len()
    }

    pub fn resource_count(&self) -> usize {
        self.ledgers.len()
    }

    /// Value of a fluent at `t`: the latest change at or before `t`.
    pub fn value_at(&self, gid: usize, t: i64) -> Value {
        self.store.get().value_at(gid, t.max(0))
    }

    pub fn change_at(&self, gid: usize, t: i64) -> Option<Change> {
        self.store.get().change_at(gid, t)
    }

    /// Changes of one fluent in `[lo, hi]`, ascending.
    pub fn changes(&self, gid: usize, lo: i64, hi: i64) -> Vec<Change> {
        self.store.get().changes_in(gid, lo, hi)
    }

    /// Whether no later write can change the value at `t` without a
    /// conflict: it was written explicitly at `t` or lies inside a hold.
    pub fn pinned(&self, gid: usize, t: i64) -> bool {
        matches!(self.change_at(gid, t), Some(c) if c.kind != ChangeKind::Restore)
            || self.hold_at(gid, t).is_some()
    }

    fn hold_at(&self, gid: usize, t: i64) -> Option<Value> {
        self.holds[gid]
            .as_ref()?
            .iter()
            .find(|h| h.lo <= t && t <= h.hi)
            .map(|h| h.value)
    }

    fn mark(&mut self, ts: &[i64]) {
        let p = Arc::make_mut(&mut self.points);
        for &t in ts {
            p.insert(t);
        }
    }

    /// Explicit write of `v` at `t`.
    pub fn write(&mut self, gid: usize, t: i64, v: Value) -> Result<(), TimelineError> {
        if matches!(self.hold_at(gid, t), Some(h) if h != v) {
            return Err(TimelineError::Conflict { gid, t });
        }
        match self.change_at(gid, t) {
            Some(c) if c.kind != ChangeKind::Restore => {
                if c.value != v {
                    return Err(TimelineError::Conflict { gid, t });
                }
            }
            _ => self.store.get_mut().set(
                gid,
                Change {
                    t,
                    value: v,
                    kind: ChangeKind::Explicit,
                },
            ),
        }
        self.horizon = self.horizon.max(t);
        self.mark(&[t, t + 1]);
        Ok(())
    }

    /// Interval write: `v` from `lo` through `hi`, then the value from
    /// before `lo` again at `hi + 1` unless something else is written there.
    pub fn write_interval(&mut self, gid: usize, lo: i64, hi: i64, v: Value) -> Result<(), TimelineError> {
        if lo > hi {
            return Ok(());
        }
        for c in self.changes(gid, lo, hi) {
            if c.kind != ChangeKind::Restore && c.value != v {
                return Err(TimelineError::Conflict { gid, t: c.t });
            }
        }
        if let Some(hs) = &self.holds[gid] {
            if let Some(h) = hs.iter().find(|h| h.lo <= hi && lo <= h.hi && h.value != v) {
                return Err(TimelineError::Conflict {
                    gid,
                    t: h.lo.max(lo),
                });
            }
        }
        let prior = self.value_at(gid, lo - 1);
        self.write(gid, lo, v)?;
        // Restores inside the interval are superseded by the hold.
        for c in self.changes(gid, lo + 1, hi) {
            if c.kind == ChangeKind::Restore {
                self.store.get_mut().set(gid, Change { value: v, ..c });
            }
        }
        let holds = self.holds[gid].get_or_insert_with(|| Arc::new(vec![]));
        Arc::make_mut(holds).push(Hold { lo, hi, value: v });
        if self.change_at(gid, hi + 1).is_none() && self.hold_at(gid, hi + 1).is_none() {
            self.store.get_mut().set(
                gid,
                Change {
                    t: hi + 1,
                    value: prior,
                    kind: ChangeKind::Restore,
                },
            );
        }
        self.horizon = self.horizon.max(hi + 1);
        self.mark(&[lo, hi + 1, hi + 2]);
        Ok(())
    }

    /// Record a resource effect over `[lo, hi]` (`lo == hi` for point effects).
    pub fn resource_event(
        &mut self,
        rid: usize,
        kind: ResourceKind,
        lo: i64,
        hi: i64,
        amount: Decimal,
        owner: usize,
    ) -> Result<(), TimelineError> {
        if amount.is_negative() && kind != ResourceKind::Assign {
            return Err(TimelineError::NegativeAmount { rid, amount });
        }
        let l = Arc::make_mut(&mut self.ledgers[rid]);
        match kind {
            ResourceKind::Consume | ResourceKind::Produce | ResourceKind::Assign => {
                let s = l.steps.entry(lo).or_default();
                if kind == ResourceKind::Assign {
                    if s.touched || s.assign.is_some_and(|a| a != amount) {
                        return Err(TimelineError::ResourceConflict { rid, t: lo });
                    }
                    s.assign = Some(amount);
                } else {
                    if s.assign.is_some() {
                        return Err(TimelineError::ResourceConflict { rid, t: lo });
                    }
                    s.touched = true;
                    if kind == ResourceKind::Consume {
                        s.consumed = s.consumed + amount;
                    } else {
                        s.produced = s.produced + amount;
                    }
                }
                self.mark(&[lo, lo + 1]);
            }
            ResourceKind::BorrowExclusive | ResourceKind::BorrowNonExclusive => {
                let b = Borrow {
                    lo,
                    hi,
                    amount,
                    owner,
                };
                if kind == ResourceKind::BorrowExclusive {
                    if let Some(o) = l.exclusive.iter().find(|o| o.lo <= hi && lo <= o.hi) {
                        return Err(TimelineError::ExclusiveOverlap {
                            rid,
                            t: o.lo.max(lo),
                        });
                    }
                    l.exclusive.push(b);
                } else {
                    l.shared.push(b);
                }
                self.mark(&[lo, hi + 1]);
            }
        }
        self.horizon = self.horizon.max(hi + 1);
        Ok(())
    }

    pub fn aspect(&self, rid: usize, aspect: Aspect, t: i64) -> Decimal {
        let l = &self.ledgers[rid];
        let t = t.max(0);
        match aspect {
            Aspect::Init => l.init_at(t),
            Aspect::Consumed => l.step(t).consumed,
            Aspect::Produced => l.step(t).produced,
            Aspect::Borrowed => l.borrowed(t),
            Aspect::BorrowedNonex => l.borrowed_shared(t),
            Aspect::Available => l.available(t),
            Aspect::Minimum => self.bounds[rid].0,
            Aspect::Maximum => self.bounds[rid].1,
        }
    }

    /// First bounds violation of any resource at a timepoint in `[lo, hi]`.
    pub fn check_resources(&self, lo: i64, hi: i64) -> Result<(), TimelineError> {
        let mut first: Option<TimelineError> = None;
        for (rid, l) in self.ledgers.iter().enumerate() {
            let (min, max) = self.bounds[rid];
            for t in l.critical_points() {
                if t < lo || t > hi {
                    continue;
                }
                let a = l.available(t);
                if a < min || a > max {
                    let better = match &first {
                        Some(TimelineError::BoundsViolation { t: ft, .. }) => t < *ft,
                        _ => true,
                    };
                    if better {
                        first = Some(TimelineError::BoundsViolation { rid, t, available: a });
                    }
                    break;
                }
            }
        }
        first.map_or(Ok(()), Err)
    }

    /// Timepoints in `[lo, hi]` where some value or its pinning may change.
    pub fn points(&self, lo: i64, hi: i64) -> impl Iterator<Item = i64> + '_ {
        let hi = hi.max(lo - 1);
        self.points.range(lo..=hi).copied()
    }

    /// View that treats everything after `frozen` as undecided unless pinned.
    pub fn frozen(&self, frozen: i64) -> Frozen<'_> {
        Frozen { tl: self, frozen }
    }
}

impl StateView for Timeline {
    fn fluent(&self, gid: usize, t: i64) -> Option<Value> {
        Some(self.value_at(gid, t))
    }

    fn aspect(&self, rid: usize, aspect: Aspect, t: i64) -> Option<Decimal> {
        Some(Timeline::aspect(self, rid, aspect, t))
    }

    fn change_points(&self, lo: i64, hi: i64) -> Vec<i64> {
        if lo > hi {
            return vec![];
        }
        self.points(lo, hi).collect()
    }
}

/// A timeline as seen from a search node whose state is final up to `frozen`.
pub struct Frozen<'a> {
    tl: &'a Timeline,
    frozen: i64,
}

impl StateView for Frozen<'_> {
    fn fluent(&self, gid: usize, t: i64) -> Option<Value> {
        (t <= self.frozen || self.tl.pinned(gid, t)).then(|| self.tl.value_at(gid, t))
    }

    fn aspect(&self, rid: usize, aspect: Aspect, t: i64) -> Option<Decimal> {
        match aspect {
            Aspect::Minimum | Aspect::Maximum => Some(self.tl.aspect(rid, aspect, t)),
            _ => (t <= self.frozen).then(|| self.tl.aspect(rid, aspect, t)),
        }
    }

    fn change_points(&self, lo: i64, hi: i64) -> Vec<i64> {
        if lo > hi {
            return vec![];
        }
        let mut v: Vec<i64> = self.tl.points(lo, hi).collect();
        let f = self.frozen.saturating_add(1);
        if lo <= f && f <= hi {
            if let Err(i) = v.binary_search(&f) {
                v.insert(i, f);
            }
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn n(v: i64) -> Decimal {
        Decimal::from_int(v).unwrap()
    }

    fn tl(init: &[bool], kind: StateKind) -> Timeline {
        let init: Vec<Value> = init.iter().map(|&b| Value::bool(b)).collect();
        Timeline::from_parts(&init, &[], vec![], kind)
    }

    fn res(init: i64, lo: i64, hi: i64) -> Timeline {
        Timeline::from_parts(&[], &[n(init)], vec![(n(lo), n(hi))], StateKind::Sparse)
    }

    const T: Value = Value::Obj(crate::model::TRUE);
    const F: Value = Value::Obj(crate::model::FALSE);

    #[test]
    fn persistence() {
        let mut a = tl(&[true, false], StateKind::Sparse);
        assert_eq!(a.value_at(0, 5), T);
        a.write(1, 7, T).unwrap();
        assert_eq!(a.value_at(1, 6), F);
        assert_eq!(a.value_at(1, 7), T);
        assert_eq!(a.value_at(1, 1000), T);
    }

    #[test]
    fn same_value_merges_different_conflicts() {
        let mut a = tl(&[false], StateKind::Sparse);
        a.write(0, 3, T).unwrap();
        a.write(0, 3, T).unwrap();
        assert_eq!(a.write(0, 3, F), Err(TimelineError::Conflict { gid: 0, t: 3 }));
    }

    #[test]
    fn interval_write_restores_prior_value() {
        let mut a = tl(&[false], StateKind::Sparse);
        a.write_interval(0, 1, 179, T).unwrap();
        assert_eq!(a.value_at(0, 0), F);
        assert_eq!(a.value_at(0, 1), T);
        assert_eq!(a.value_at(0, 179), T);
        assert_eq!(a.value_at(0, 180), F);
        assert_eq!(a.changes(0, 0, 1000).len(), 3);
    }

    #[test]
    fn explicit_write_overrides_restore() {
        let mut a = tl(&[false], StateKind::Sparse);
        a.write_interval(0, 1, 9, T).unwrap();
        a.write(0, 10, T).unwrap();
        assert_eq!(a.value_at(0, 10), T);
        let mut b = tl(&[false], StateKind::Sparse);
        b.write(0, 10, T).unwrap();
        b.write_interval(0, 1, 9, T).unwrap();
        assert_eq!(b.value_at(0, 10), T);
    }

    #[test]
    fn write_inside_hold_conflicts() {
        let mut a = tl(&[false], StateKind::Sparse);
        a.write_interval(0, 1, 9, T).unwrap();
        assert!(a.write(0, 5, F).is_err());
        assert!(a.write_interval(0, 8, 12, F).is_err());
        a.write(0, 5, T).unwrap();
        assert!(a.pinned(0, 5));
        assert!(!a.pinned(0, 10));
    }

    #[test]
    fn overlapping_equal_holds_keep_value() {
        let mut a = tl(&[false], StateKind::Sparse);
        a.write_interval(0, 5, 20, T).unwrap();
        a.write_interval(0, 1, 10, T).unwrap();
        assert_eq!(a.value_at(0, 11), T);
        assert_eq!(a.value_at(0, 20), T);
        assert_eq!(a.value_at(0, 21), F);
    }

    #[test]
    fn child_leaves_parent_untouched() {
        let mut parent = tl(&[false, true], StateKind::Sparse);
        parent.write(0, 4, T).unwrap();
        let snap: Vec<Value> = (0..10).map(|t| parent.value_at(0, t)).collect();
        let mut child = parent.clone();
        child.write(0, 6, F).unwrap();
        child.write_interval(1, 2, 3, F).unwrap();
        assert_eq!((0..10).map(|t| parent.value_at(0, t)).collect::<Vec<_>>(), snap);
        assert_eq!(parent.value_at(1, 2), T);
        assert_eq!(child.value_at(0, 7), F);
    }

    #[test]
    fn consume_and_produce() {
        let mut r = res(4, 0, 10);
        r.resource_event(0, ResourceKind::Consume, 3, 3, n(1), 0).unwrap();
        r.resource_event(0, ResourceKind::Produce, 3, 3, n(2), 1).unwrap();
        assert_eq!(r.aspect(0, Aspect::Available, 3), n(5));
        assert_eq!(r.aspect(0, Aspect::Init, 3), n(4));
        assert_eq!(r.aspect(0, Aspect::Init, 4), n(5));
        assert_eq!(r.aspect(0, Aspect::Consumed, 3), n(1));
        assert_eq!(r.aspect(0, Aspect::Produced, 3), n(2));
        assert_eq!(r.aspect(0, Aspect::Maximum, 3), n(10));
    }

    #[test]
    fn exclusive_borrow() {
        let mut r = res(1, 0, 1);
        r.resource_event(0, ResourceKind::BorrowExclusive, 1, 5, n(1), 0).unwrap();
        assert_eq!(r.aspect(0, Aspect::Available, 3), n(0));
        assert_eq!(r.aspect(0, Aspect::Available, 6), n(1));
        assert_eq!(
            r.resource_event(0, ResourceKind::BorrowExclusive, 5, 8, n(1), 1),
            Err(TimelineError::ExclusiveOverlap { rid: 0, t: 5 })
        );
        r.resource_event(0, ResourceKind::BorrowExclusive, 6, 8, n(1), 1).unwrap();
    }

    #[test]
    fn shared_borrows_take_the_max() {
        let mut r = res(1, 0, 1);
        r.resource_event(0, ResourceKind::BorrowNonExclusive, 1, 5, n(1), 0).unwrap();
        r.resource_event(0, ResourceKind::BorrowNonExclusive, 3, 8, n(1), 1).unwrap();
        assert_eq!(r.aspect(0, Aspect::Available, 4), n(0));
        assert_eq!(r.aspect(0, Aspect::BorrowedNonex, 4), n(1));
        r.check_resources(0, 100).unwrap();
    }

    #[test]
    fn bounds_violation() {
        let mut r = res(0, 0, 3);
        r.resource_event(0, ResourceKind::Consume, 1, 1, n(1), 0).unwrap();
        assert_eq!(
            r.check_resources(0, 100),
            Err(TimelineError::BoundsViolation { rid: 0, t: 1, available: n(-1) })
        );
        assert!(r.check_resources(2, 100).is_err());
        assert!(r.check_resources(0, 0).is_ok());
    }

    #[test]
    fn assign_alongside_consume_conflicts() {
        let mut r = res(2, 0, 9);
        r.resource_event(0, ResourceKind::Assign, 2, 2, n(7), 0).unwrap();
        assert_eq!(r.aspect(0, Aspect::Init, 3), n(7));
        assert!(r.resource_event(0, ResourceKind::Consume, 2, 2, n(1), 1).is_err());
        assert!(r.resource_event(0, ResourceKind::Assign, 2, 2, n(6), 1).is_err());
        assert!(r.resource_event(0, ResourceKind::Consume, 1, 1, n(-1), 1).is_err());
    }

    #[test]
    fn frozen_view_hides_undecided_future() {
        let mut a = tl(&[false], StateKind::Sparse);
        a.write(0, 8, T).unwrap();
        a.write_interval(0, 12, 14, F).unwrap();
        let v = a.frozen(5);
        assert_eq!(v.fluent(0, 5), Some(F));
        assert_eq!(v.fluent(0, 6), None);
        assert_eq!(v.fluent(0, 8), Some(T));
        assert_eq!(v.fluent(0, 13), Some(F));
        assert_eq!(v.fluent(0, 15), None);
        assert_eq!(v.change_points(0, 20), vec![6, 8, 9, 12, 13, 15, 16]);
    }

    #[derive(Debug, Clone)]
    enum Op {
        Point(usize, i64, bool),
        Interval(usize, i64, i64, bool),
    }

    fn op() -> impl Strategy<Value = Op> {
        prop_oneof![
            (0..3usize, 1..60i64, any::<bool>()).prop_map(|(g, t, b)| Op::Point(g, t, b)),
            (0..3usize, 1..60i64, 0..20i64, any::<bool>()).prop_map(|(g, t, d, b)| Op::Interval(g, t, t + d, b)),
        ]
    }

    fn apply(t: &mut Timeline, o: &Op) -> Result<(), TimelineError> {
        match *o {
            Op::Point(g, at, b) => t.write(g, at, Value::bool(b)),
            Op::Interval(g, lo, hi, b) => t.write_interval(g, lo, hi, Value::bool(b)),
        }
    }

    proptest! {
        #[test]
        fn sparse_matches_dense(ops in proptest::collection::vec(op(), 0..30)) {
            let mut s = tl(&[false, true, false], StateKind::Sparse);
            let mut d = tl(&[false, true, false], StateKind::Dense);
            for o in &ops {
                let (rs, rd) = (apply(&mut s, o), apply(&mut d, o));
                prop_assert_eq!(rs.is_ok(), rd.is_ok());
                if rs.is_err() {
                    s = s.clone();
                    d = d.clone();
                }
            }
            for g in 0..3 {
                for t in 0..100 {
                    prop_assert_eq!(s.value_at(g, t), d.value_at(g, t));
                    prop_assert_eq!(s.change_at(g, t), d.change_at(g, t));
                }
            }
        }

        #[test]
        fn lookup_matches_linear_scan(ops in proptest::collection::vec(op(), 0..30)) {
            let mut s = tl(&[false, true, false], StateKind::Sparse);
            for o in &ops {
                let _ = apply(&mut s, o);
            }
            for g in 0..3 {
                let all = s.changes(g, 0, i64::MAX);
                prop_assert!(all.windows(2).all(|w| w[0].t < w[1].t));
                for t in 0..100 {
                    let scan = all.iter().filter(|c| c.t <= t).last().unwrap().value;
                    prop_assert_eq!(s.value_at(g, t), scan);
                }
            }
        }

        #[test]
        fn writes_never_touch_the_parent(ops in proptest::collection::vec(op(), 0..20)) {
            let mut parent = tl(&[false, true, false], StateKind::Sparse);
            for o in &ops[..ops.len() / 2] {
                let _ = apply(&mut parent, o);
            }
            let snap: Vec<Value> = (0..3).flat_map(|g| (0..100).map(move |t| (g, t)))
                .map(|(g, t)| parent.value_at(g, t)).collect();
            let mut child = parent.clone();
            for o in &ops[ops.len() / 2..] {
                let _ = apply(&mut child, o);
            }
            let now: Vec<Value> = (0..3).flat_map(|g| (0..100).map(move |t| (g, t)))
                .map(|(g, t)| parent.value_at(g, t)).collect();
            prop_assert_eq!(snap, now);
        }

        #[test]
        fn ledger_conservation(evs in proptest::collection::vec((0..30i64, 0..5i64, any::<bool>()), 0..20)) {
            let mut r = res(50, -1000, 1000);
            for (t, a, consume) in evs {
                let k = if consume { ResourceKind::Consume } else { ResourceKind::Produce };
                r.resource_event(0, k, t, t, n(a), 0).unwrap();
            }
            for t in 0..40 {
                let lhs = r.aspect(0, Aspect::Init, t + 1) - r.aspect(0, Aspect::Init, t);
                let rhs = r.aspect(0, Aspect::Produced, t) - r.aspect(0, Aspect::Consumed, t);
                prop_assert_eq!(lhs, rhs);
            }
        }
    }
}
