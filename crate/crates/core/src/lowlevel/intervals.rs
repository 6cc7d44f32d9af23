use std::collections::HashMap;

use crate::lowlevel::ConstraintSet;
use crate::{Tick, VertexId};

/// Inclusive tick range free of vertex constraints.
pub type Interval = (Tick, Tick);

const FREE: [Interval; 1] = [(0, Tick::MAX)];

/// Safe intervals of one agent. Vertices without constraints have the
/// single interval `[0, horizon]`.
#[derive(Debug, Clone)]
pub struct SafeIntervalTable {
    horizon: Tick,
    free: [Interval; 1],
    intervals: HashMap<VertexId, Vec<Interval>>,
}

impl SafeIntervalTable {
    /// Complement of the constrained ticks per vertex, clipped to `horizon`.
    pub fn build(cs: &ConstraintSet, horizon: Tick) -> Self {
        let mut intervals = HashMap::new();
        for v in cs.constrained_vertices() {
            let mut list = Vec::new();
            let mut lo: u64 = 0;
            for &t in cs.vertex_ticks(v).unwrap() {
                if t > horizon {
                    break;
                }
                if (t as u64) > lo {
                    list.push((lo as Tick, t - 1));
                }
                lo = t as u64 + 1;
            }
            if lo <= horizon as u64 {
                list.push((lo as Tick, horizon));
            }
            intervals.insert(v, list);
        }
        Self { horizon, free: [(0, horizon)], intervals }
    }

    pub fn horizon(&self) -> Tick {
        self.horizon
    }

    pub fn intervals(&self, v: VertexId) -> &[Interval] {
        self.intervals.get(&v).map_or(&self.free[..], |l| l.as_slice())
    }

    /// Index of the interval containing `t`.
    pub fn interval_at(&self, v: VertexId, t: Tick) -> Option<usize> {
        let list = self.intervals(v);
        let k = list.partition_point(|&(_, e)| e < t);
        (k < list.len() && list[k].0 <= t).then_some(k)
    }
}

impl Default for SafeIntervalTable {
    fn default() -> Self {
        Self { horizon: Tick::MAX, free: FREE, intervals: HashMap::new() }
    }
}
