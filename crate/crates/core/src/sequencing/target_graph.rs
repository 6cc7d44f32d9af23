use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::workspace::{Instance, UNREACHABLE};
use crate::VertexId;

/// Complete graph over the key vertices (starts, then targets, then goals)
/// weighted by shortest-path length in the workspace.
#[derive(Debug, Clone)]
pub struct TargetGraph {
    keys: Vec<VertexId>,
    index: HashMap<VertexId, usize>,
    cost: Vec<Vec<u32>>,
}

impl TargetGraph {
    pub fn keys(&self) -> &[VertexId] {
        &self.keys
    }

    pub fn key_index(&self, v: VertexId) -> Option<usize> {
        self.index.get(&v).copied()
    }

    /// Metric cost between two key vertices, by workspace id.
    pub fn cost(&self, u: VertexId, v: VertexId) -> u32 {
        self.cost[self.index[&u]][self.index[&v]]
    }

    /// Metric cost by key index.
    pub fn cost_idx(&self, i: usize, j: usize) -> u32 {
        self.cost[i][j]
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

/// One BFS per key vertex. Fails on the first disconnected pair.
pub fn compute_target_graph(inst: &Instance) -> Result<TargetGraph> {
    let keys: Vec<VertexId> = inst.starts.iter().chain(&inst.targets).chain(&inst.goals).copied().collect();
    let index: HashMap<VertexId, usize> = keys.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    if index.len() != keys.len() {
        return Err(Error::Instance("key vertices are not distinct".into()));
    }
    let mut cost = Vec::with_capacity(keys.len());
    for &u in &keys {
        let dist = inst.graph().bfs(u);
        let mut row = Vec::with_capacity(keys.len());
        for &v in &keys {
            if dist[v] == UNREACHABLE {
                return Err(Error::Disconnected { from: u, to: v });
            }
            row.push(dist[v]);
        }
        cost.push(row);
    }
    Ok(TargetGraph { keys, index, cost })
}
