use serde::{Deserialize, Serialize};

use crate::{Tick, VertexId};

/// Ticks `start..=end` during which an agent executes the task at `vertex`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TaskWindow {
    pub vertex: VertexId,
    pub start: Tick,
    pub end: Tick,
}

impl TaskWindow {
    pub fn contains(&self, t: Tick) -> bool {
        self.start <= t && t <= self.end
    }
}

/// Vertex per tick for one agent, plus the windows in which it executes
/// its tasks (in sequence order, goal last). After the last tick the
/// agent rests at its goal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Path {
    pub vertices: Vec<VertexId>,
    pub tasks: Vec<TaskWindow>,
}

impl Path {
    /// Arrival tick at the goal, counting the goal's own task.
    pub fn cost(&self) -> u64 {
        self.vertices.len() as u64 - 1
    }

    /// Location at `t`, resting at the goal after the end.
    pub fn at(&self, t: Tick) -> VertexId {
        self.vertices[(t as usize).min(self.vertices.len() - 1)]
    }

    pub fn goal(&self) -> VertexId {
        *self.vertices.last().unwrap()
    }

    pub fn last_tick(&self) -> Tick {
        (self.vertices.len() - 1) as Tick
    }

    /// Window covering `t` at vertex `v`, if the agent executes there then.
    pub fn executing_at(&self, v: VertexId, t: Tick) -> Option<TaskWindow> {
        self.tasks.iter().copied().find(|w| w.vertex == v && w.contains(t))
    }
}
