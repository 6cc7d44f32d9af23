use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{AgentId, Tick, VertexId};

/// A prohibition on one agent. Edge constraints are undirected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Constraint {
    /// The agent may not occupy `vertex` at `tick`.
    Vertex { agent: AgentId, vertex: VertexId, tick: Tick },
    /// The agent may not traverse `edge` between `tick` and `tick + 1`.
    Edge { agent: AgentId, edge: (VertexId, VertexId), tick: Tick },
}

impl Constraint {
    pub fn vertex(agent: AgentId, vertex: VertexId, tick: Tick) -> Self {
        Constraint::Vertex { agent, vertex, tick }
    }

    pub fn edge(agent: AgentId, u: VertexId, w: VertexId, tick: Tick) -> Self {
        Constraint::Edge { agent, edge: (u.min(w), u.max(w)), tick }
    }

    pub fn agent(&self) -> AgentId {
        match *self {
            Constraint::Vertex { agent, .. } | Constraint::Edge { agent, .. } => agent,
        }
    }

    pub fn tick(&self) -> Tick {
        match *self {
            Constraint::Vertex { tick, .. } | Constraint::Edge { tick, .. } => tick,
        }
    }

    /// Whether a vertex-per-tick path (resting at its last vertex forever)
    /// breaks this constraint.
    pub fn violated_by(&self, path: &[VertexId]) -> bool {
        let at = |t: Tick| path[(t as usize).min(path.len() - 1)];
        match *self {
            Constraint::Vertex { vertex, tick, .. } => at(tick) == vertex,
            Constraint::Edge { edge, tick, .. } => {
                let (a, b) = (at(tick), at(tick + 1));
                a != b && (a.min(b), a.max(b)) == edge
            }
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Vertex { agent, vertex, tick } => write!(f, "({agent},{vertex},{tick})"),
            Constraint::Edge { agent, edge, tick } => write!(f, "({agent},{}-{},{tick})", edge.0, edge.1),
        }
    }
}

/// Constraints of a single agent, indexed for the planner.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstraintSet {
    vertex: HashMap<VertexId, BTreeSet<Tick>>,
    edge: HashSet<((VertexId, VertexId), Tick)>,
    len: usize,
}

impl ConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a constraint; returns false if it was already present.
    pub fn insert(&mut self, c: Constraint) -> bool {
        let fresh = match c {
            Constraint::Vertex { vertex, tick, .. } => self.vertex.entry(vertex).or_default().insert(tick),
            Constraint::Edge { edge, tick, .. } => self.edge.insert((edge, tick)),
        };
        self.len += fresh as usize;
        fresh
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn vertex_ticks(&self, v: VertexId) -> Option<&BTreeSet<Tick>> {
        self.vertex.get(&v)
    }

    pub fn constrained_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertex.keys().copied()
    }

    pub fn forbids_vertex(&self, v: VertexId, t: Tick) -> bool {
        self.vertex.get(&v).is_some_and(|s| s.contains(&t))
    }

    pub fn forbids_edge(&self, u: VertexId, w: VertexId, t: Tick) -> bool {
        !self.edge.is_empty() && self.edge.contains(&((u.min(w), u.max(w)), t))
    }

    pub fn max_tick(&self) -> Option<Tick> {
        let v = self.vertex.values().filter_map(|s| s.last().copied()).max();
        let e = self.edge.iter().map(|&(_, t)| t).max();
        v.max(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_is_undirected() {
        assert_eq!(Constraint::edge(0, 5, 4, 2), Constraint::edge(0, 4, 5, 2));
        let mut cs = ConstraintSet::new();
        cs.insert(Constraint::edge(0, 5, 4, 2));
        assert!(cs.forbids_edge(4, 5, 2));
        assert!(cs.forbids_edge(5, 4, 2));
        assert!(!cs.forbids_edge(4, 5, 3));
    }

    #[test]
    fn duplicates_are_counted_once() {
        let mut cs = ConstraintSet::new();
        assert!(cs.insert(Constraint::vertex(1, 9, 3)));
        assert!(!cs.insert(Constraint::vertex(1, 9, 3)));
        assert_eq!(cs.len(), 1);
        assert_eq!(cs.max_tick(), Some(3));
    }

    #[test]
    fn violation_includes_rest() {
        let path = [1, 5, 9];
        assert!(Constraint::vertex(0, 9, 7).violated_by(&path));
        assert!(Constraint::edge(0, 9, 5, 1).violated_by(&path));
        assert!(!Constraint::edge(0, 9, 5, 2).violated_by(&path));
    }
}
