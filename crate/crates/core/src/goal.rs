//! What the goal statements pin down about the final state.

use std::collections::HashMap;

use crate::model::{ground_instances, Domain, GroundIndex, SortTable, Value};

/// Values every goal state must give to some ground fluents. Boolean
/// fluents marked functional also get the derived `false` entries for the
/// other values of their functional argument.
#[derive(Debug, Clone, Default)]
pub struct GoalAbstraction {
    values: HashMap<usize, Value>,
}

impl GoalAbstraction {
    pub fn new(
        domain: &Domain,
        sorts: &SortTable,
        index: &GroundIndex,
        goals: &[(usize, Value)],
    ) -> Self {
        let mut values: HashMap<usize, Value> = goals.iter().copied().collect();
        for &(gid, v) in goals {
            if v != Value::bool(true) {
                continue;
            }
            let (f, args) = index.decode_fluent(domain, sorts, gid);
            let decl = &domain.fluents[f as usize];
            let Some(p) = decl.functional else { continue };
            for alt in ground_instances(sorts, &[decl.args[p]]) {
                let mut a = args.clone();
                a[p] = alt[0];
                if let Some(other) = index.fluent(domain, sorts, f, &a) {
                    if other != gid {
                        values.entry(other).or_insert(Value::bool(false));
                    }
                }
            }
        }
        GoalAbstraction { values }
    }

    /// The value a ground fluent has in every goal state, if determined.
    pub fn value(&self, gid: usize) -> Option<Value> {
        self.values.get(&gid).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
