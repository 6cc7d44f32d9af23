use std::fmt;

use serde::{Deserialize, Serialize};

use crate::sequencing::TargetGraph;
use crate::workspace::Instance;
use crate::VertexId;

/// Per-agent visiting orders: start, assigned targets, goal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JointSequence {
    pub sequences: Vec<Vec<VertexId>>,
    pub cost: u64,
}

impl JointSequence {
    /// Builds a sequence and prices it: metric legs plus the duration of
    /// every visited task for the visiting agent. Returns `None` when an
    /// assignment is not eligible.
    pub fn priced(sequences: Vec<Vec<VertexId>>, tg: &TargetGraph, inst: &Instance) -> Option<Self> {
        let cost = sequence_cost(&sequences, tg, inst)?;
        Some(Self { sequences, cost })
    }

    pub fn num_agents(&self) -> usize {
        self.sequences.len()
    }

    /// Tasks (targets and goal) of one agent, in order.
    pub fn tasks(&self, agent: usize) -> &[VertexId] {
        &self.sequences[agent][1..]
    }
}

impl fmt::Display for JointSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .sequences
            .iter()
            .map(|s| {
                let items: Vec<String> = s.iter().map(|v| v.to_string()).collect();
                format!("({})", items.join(","))
            })
            .collect();
        write!(f, "{{{}}} cost {}", parts.join(","), self.cost)
    }
}

pub fn sequence_cost(sequences: &[Vec<VertexId>], tg: &TargetGraph, inst: &Instance) -> Option<u64> {
    let mut total = 0u64;
    for (agent, seq) in sequences.iter().enumerate() {
        for pair in seq.windows(2) {
            total += tg.cost(pair[0], pair[1]) as u64;
            total += inst.duration(agent, pair[1])? as u64;
        }
    }
    Some(total)
}

/// Whether `seq` is a complete joint sequence for `inst`: each agent starts
/// at its start, ends at a distinct eligible goal, and every target appears
/// exactly once with an eligible agent.
pub fn is_complete(sequences: &[Vec<VertexId>], inst: &Instance) -> bool {
    if sequences.len() != inst.num_agents() {
        return false;
    }
    let mut targets = Vec::new();
    let mut goals = Vec::new();
    for (a, seq) in sequences.iter().enumerate() {
        if seq.len() < 2 || seq[0] != inst.starts[a] {
            return false;
        }
        let goal = *seq.last().unwrap();
        if !inst.is_goal(goal) || !inst.is_eligible(a, goal) {
            return false;
        }
        goals.push(goal);
        for &t in &seq[1..seq.len() - 1] {
            if !inst.targets.contains(&t) || !inst.is_eligible(a, t) {
                return false;
            }
            targets.push(t);
        }
    }
    targets.sort_unstable();
    goals.sort_unstable();
    let mut expected = inst.targets.clone();
    expected.sort_unstable();
    targets == expected && goals.windows(2).all(|w| w[0] != w[1])
}
