//! Resource bookkeeping for one ground resource.

use std::collections::BTreeMap;

use crate::Decimal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub(crate) struct Step {
    pub consumed: Decimal,
    pub produced: Decimal,
    pub touched: bool,
    pub assign: Option<Decimal>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Borrow {
    pub lo: i64,
    pub hi: i64,
    pub amount: Decimal,
    pub owner: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Ledger {
    pub init: Decimal,
    pub steps: BTreeMap<i64, Step>,
    pub exclusive: Vec<Borrow>,
    pub shared: Vec<Borrow>,
}

fn zero() -> Decimal {
    Decimal::new(0, 0)
}

impl Ledger {
    pub fn new(init: Decimal) -> Self {
        Ledger {
            init,
            steps: BTreeMap::new(),
            exclusive: vec![],
            shared: vec![],
        }
    }

    /// Level at the start of `t`, before that timepoint's own activity.
    pub fn init_at(&self, t: i64) -> Decimal {
        let mut level = self.init;
        for (_, s) in self.steps.range(..t) {
            level = match s.assign {
                Some(a) => a,
                None => level - s.consumed + s.produced,
            };
        }
        level
    }

    pub fn step(&self, t: i64) -> Step {
        self.steps.get(&t).copied().unwrap_or_default()
    }

    pub fn borrowed(&self, t: i64) -> Decimal {
        self.exclusive
            .iter()
            .filter(|b| b.lo <= t && t <= b.hi)
            .fold(zero(), |acc, b| acc + b.amount)
    }

    pub fn borrowed_shared(&self, t: i64) -> Decimal {
        self.shared
            .iter()
            .filter(|b| b.lo <= t && t <= b.hi)
            .map(|b| b.amount)
            .max()
            .unwrap_or_else(zero)
    }

    pub fn available(&self, t: i64) -> Decimal {
        let s = self.step(t);
        self.init_at(t) - s.consumed + s.produced - self.borrowed(t) - self.borrowed_shared(t)
    }

    /// Timepoints where the available amount may change.
    pub fn critical_points(&self) -> Vec<i64> {
        let mut v = vec![0];
        for &t in self.steps.keys() {
            v.push(t);
            v.push(t + 1);
        }
        for b in self.exclusive.iter().chain(&self.shared) {
            v.push(b.lo);
            v.push(b.hi + 1);
        }
        v.sort_unstable();
        v.dedup();
        v
    }
}
