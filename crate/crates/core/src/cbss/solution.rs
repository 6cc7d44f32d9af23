use serde::{Deserialize, Serialize};

use crate::cbss::{Outcome, Stats};
use crate::error::Result;
use crate::lowlevel::{Path, TaskWindow};
use crate::VertexId;

/// On-disk form of a solver result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub status: String,
    pub cost: Option<u64>,
    pub paths: Vec<Vec<VertexId>>,
    pub tasks: Vec<Vec<TaskWindow>>,
    pub stats: Stats,
}

impl SolutionFile {
    pub fn from_outcome(out: &Outcome) -> Self {
        let (cost, paths, tasks) = match out.solution() {
            Some(s) => (
                Some(s.cost),
                s.paths.iter().map(|p| p.vertices.clone()).collect(),
                s.paths.iter().map(|p| p.tasks.clone()).collect(),
            ),
            None => (None, vec![], vec![]),
        };
        Self { status: out.status().to_string(), cost, paths, tasks, stats: *out.stats() }
    }

    pub fn paths(&self) -> Vec<Path> {
        self.paths
            .iter()
            .enumerate()
            .map(|(a, v)| Path { vertices: v.clone(), tasks: self.tasks.get(a).cloned().unwrap_or_default() })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
