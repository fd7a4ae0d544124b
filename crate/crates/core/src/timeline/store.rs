//! Per-fluent change storage. The sparse store keeps only the timepoints
//! where something was written; the dense store keeps a value for every
//! timepoint up to the latest write.

use std::sync::Arc;

use crate::model::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChangeKind {
    Initial,
    Explicit,
    /// Written by an interval effect at the end of its interval; any
    /// explicit write at the same timepoint replaces it.
    Restore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Change {
    pub t: i64,
    pub value: Value,
    pub kind: ChangeKind,
}

pub(crate) trait ChangeStore {
    fn value_at(&self, gid: usize, t: i64) -> Value;
    fn change_at(&self, gid: usize, t: i64) -> Option<Change>;
    fn set(&mut self, gid: usize, c: Change);
    /// Changes with `lo <= t <= hi`, ascending.
    fn changes_in(&self, gid: usize, lo: i64, hi: i64) -> Vec<Change>;
}

#[derive(Debug, Clone)]
pub(crate) struct Sparse {
    lists: Vec<Arc<Vec<Change>>>,
}

impl Sparse {
    pub fn new(init: &[Value]) -> Self {
        Sparse {
            lists: init
                .iter()
                .map(|&v| {
                    Arc::new(vec![Change {
                        t: 0,
                        value: v,
                        kind: ChangeKind::Initial,
                    }])
                })
                .collect(),
        }
    }
}

impl ChangeStore for Sparse {
    fn value_at(&self, gid: usize, t: i64) -> Value {
        let l = &self.lists[gid];
        let i = l.partition_point(|c| c.t <= t);
        l[i.max(1) - 1].value
    }

    fn change_at(&self, gid: usize, t: i64) -> Option<Change> {
        let l = &self.lists[gid];
        l.binary_search_by_key(&t, |c| c.t).ok().map(|i| l[i])
    }

    fn set(&mut self, gid: usize, c: Change) {
        let l = Arc::make_mut(&mut self.lists[gid]);
        match l.binary_search_by_key(&c.t, |x| x.t) {
            Ok(i) => l[i] = c,
            Err(i) => l.insert(i, c),
        }
    }

    fn changes_in(&self, gid: usize, lo: i64, hi: i64) -> Vec<Change> {
        let l = &self.lists[gid];
        let a = l.partition_point(|c| c.t < lo);
        let b = l.partition_point(|c| c.t <= hi);
        l[a..b.max(a)].to_vec()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Cell {
    value: Value,
    kind: Option<ChangeKind>,
}

#[derive(Debug, Clone)]
pub(crate) struct Dense {
    /// Index is the timepoint; past the end the last value persists.
    cells: Vec<Arc<Vec<Cell>>>,
}

impl Dense {
    pub fn new(init: &[Value]) -> Self {
        Dense {
            cells: init
                .iter()
                .map(|&v| {
                    Arc::new(vec![Cell {
                        value: v,
                        kind: Some(ChangeKind::Initial),
                    }])
                })
                .collect(),
        }
    }
}

impl ChangeStore for Dense {
    fn value_at(&self, gid: usize, t: i64) -> Value {
        let c = &self.cells[gid];
        c[(t.max(0) as usize).min(c.len() - 1)].value
    }

    fn change_at(&self, gid: usize, t: i64) -> Option<Change> {
        let c = self.cells[gid].get(usize::try_from(t).ok()?)?;
        c.kind.map(|kind| Change {
            t,
            value: c.value,
            kind,
        })
    }

    fn set(&mut self, gid: usize, ch: Change) {
        let cells = Arc::make_mut(&mut self.cells[gid]);
        let t = ch.t as usize;
        if cells.len() <= t {
            let last = cells[cells.len() - 1].value;
            cells.resize(
                t + 1,
                Cell {
                    value: last,
                    kind: None,
                },
            );
        }
        cells[t] = Cell {
            value: ch.value,
            kind: Some(ch.kind),
        };
        for c in cells[t + 1..].iter_mut() {
            if c.kind.is_some() {
                break;
            }
            c.value = ch.value;
        }
    }

    fn changes_in(&self, gid: usize, lo: i64, hi: i64) -> Vec<Change> {
        let cells = &self.cells[gid];
        let lo = lo.max(0);
        let hi = hi.min(cells.len() as i64 - 1);
        (lo..=hi).filter_map(|t| self.change_at(gid, t)).collect()
    }
}
