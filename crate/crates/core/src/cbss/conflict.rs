use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::lowlevel::{Constraint, Path};
use crate::{AgentId, Tick, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConflictKind {
    Vertex(VertexId),
    /// Agent `i` moves `.0 -> .1` while agent `j` moves `.1 -> .0`.
    Edge(VertexId, VertexId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Conflict {
    pub kind: ConflictKind,
    pub i: AgentId,
    pub j: AgentId,
    pub tick: Tick,
    /// Agent executing a task at the conflict vertex at `tick`, `i` first.
    pub executing: Option<AgentId>,
}

fn vertex_conflict(paths: &[Path], i: usize, j: usize, t: Tick) -> Option<Conflict> {
    let v = paths[i].at(t);
    (v == paths[j].at(t)).then(|| {
        let executing = if paths[i].executing_at(v, t).is_some() {
            Some(i)
        } else if paths[j].executing_at(v, t).is_some() {
            Some(j)
        } else {
            None
        };
        Conflict { kind: ConflictKind::Vertex(v), i, j, tick: t, executing }
    })
}

fn edge_conflict(paths: &[Path], i: usize, j: usize, t: Tick) -> Option<Conflict> {
    let (a, b) = (paths[i].at(t), paths[i].at(t + 1));
    (a != b && paths[j].at(t) == b && paths[j].at(t + 1) == a).then_some(Conflict {
        kind: ConflictKind::Edge(a, b),
        i,
        j,
        tick: t,
        executing: None,
    })
}

fn horizon(paths: &[Path]) -> Tick {
    paths.iter().map(Path::last_tick).max().unwrap_or(0)
}

/// Earliest conflict, ordered by tick, then agent pair, vertex before edge.
/// Agents rest at their goals after their last tick.
pub fn detect_conflict(paths: &[Path]) -> Option<Conflict> {
    let h = horizon(paths);
    for t in 0..=h {
        for i in 0..paths.len() {
            for j in i + 1..paths.len() {
                if let Some(c) = vertex_conflict(paths, i, j, t) {
                    return Some(c);
                }
                if t < h {
                    if let Some(c) = edge_conflict(paths, i, j, t) {
                        return Some(c);
                    }
                }
            }
        }
    }
    None
}

/// Number of pairwise vertex and edge conflicts over the whole horizon.
pub fn count_conflicts(paths: &[Path]) -> usize {
    let h = horizon(paths);
    let mut n = 0;
    for t in 0..=h {
        for i in 0..paths.len() {
            for j in i + 1..paths.len() {
                n += vertex_conflict(paths, i, j, t).is_some() as usize;
                if t < h {
                    n += edge_conflict(paths, i, j, t).is_some() as usize;
                }
            }
        }
    }
    n
}

/// Constraint generation rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branching {
    /// Range constraints over the execution window.
    #[default]
    New,
    /// Singleton constraints.
    Old,
}

impl fmt::Display for Branching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branching::New => "new",
            Branching::Old => "old",
        })
    }
}

impl FromStr for Branching {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "new" => Ok(Branching::New),
            "old" => Ok(Branching::Old),
            _ => Err(Error::Config(format!("unknown branching rule {s:?}"))),
        }
    }
}

/// Constraint sets for the two children of a conflict, for agents `i`
/// and `j` respectively.
///
/// Under [`Branching::New`], when `i` executes at `v` over `[ts, te]`, the
/// first child forbids `i` at `v` over `[ts, t]` and the second forbids `j`
/// at `v` over `[t, te]`; mirrored when `j` executes.
pub fn generate_constraints(c: &Conflict, paths: &[Path], rule: Branching) -> (Vec<Constraint>, Vec<Constraint>) {
    let (i, j, t) = (c.i, c.j, c.tick);
    match c.kind {
        ConflictKind::Edge(a, b) => (vec![Constraint::edge(i, a, b, t)], vec![Constraint::edge(j, a, b, t)]),
        ConflictKind::Vertex(v) => {
            let window = match (rule, c.executing) {
                (Branching::New, Some(k)) => paths[k].executing_at(v, t).map(|w| (k, w)),
                _ => None,
            };
            match window {
                Some((k, w)) if k == i => (
                    (w.start..=t).map(|s| Constraint::vertex(i, v, s)).collect(),
                    (t..=w.end).map(|s| Constraint::vertex(j, v, s)).collect(),
                ),
                Some((_, w)) => (
                    (t..=w.end).map(|s| Constraint::vertex(i, v, s)).collect(),
                    (w.start..=t).map(|s| Constraint::vertex(j, v, s)).collect(),
                ),
                None => (vec![Constraint::vertex(i, v, t)], vec![Constraint::vertex(j, v, t)]),
            }
        }
    }
}
