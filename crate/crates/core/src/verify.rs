//! Independent checker for joint paths and execution traces.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::lowlevel::TaskWindow;
use crate::workspace::Instance;
use crate::{AgentId, Duration, Tick, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    AgentCount { expected: usize, got: usize },
    EmptyPath { agent: AgentId },
    WrongStart { agent: AgentId },
    IllegalMove { agent: AgentId, tick: Tick },
    VertexConflict { i: AgentId, j: AgentId, vertex: VertexId, tick: Tick },
    EdgeConflict { i: AgentId, j: AgentId, edge: (VertexId, VertexId), tick: Tick },
    BadGoal { agent: AgentId, vertex: VertexId },
    SharedGoal { vertex: VertexId },
    TaskNotExecuted { vertex: VertexId },
    TaskExecutedTwice { vertex: VertexId },
    IneligibleAgent { agent: AgentId, vertex: VertexId },
    WrongDuration { agent: AgentId, vertex: VertexId, expected: Duration, got: Duration },
    WindowNotOccupied { agent: AgentId, vertex: VertexId, tick: Tick },
    NotATask { agent: AgentId, vertex: VertexId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::AgentCount { expected, got } => write!(f, "expected {expected} paths, got {got}"),
            Violation::EmptyPath { agent } => write!(f, "agent {agent}: empty path"),
            Violation::WrongStart { agent } => write!(f, "agent {agent}: does not begin at its start"),
            Violation::IllegalMove { agent, tick } => write!(f, "agent {agent}: illegal move at tick {tick}"),
            Violation::VertexConflict { i, j, vertex, tick } => {
                write!(f, "vertex conflict: agents {i} and {j} at {vertex} at tick {tick}")
            }
            Violation::EdgeConflict { i, j, edge, tick } => {
                write!(f, "edge conflict: agents {i} and {j} swap over {}-{} at tick {tick}", edge.0, edge.1)
            }
            Violation::BadGoal { agent, vertex } => write!(f, "agent {agent}: ends at {vertex}, not an eligible goal"),
            Violation::SharedGoal { vertex } => write!(f, "goal {vertex} shared by several agents"),
            Violation::TaskNotExecuted { vertex } => write!(f, "task not executed at {vertex}"),
            Violation::TaskExecutedTwice { vertex } => write!(f, "task executed twice at {vertex}"),
            Violation::IneligibleAgent { agent, vertex } => write!(f, "agent {agent} not eligible for {vertex}"),
            Violation::WrongDuration { agent, vertex, expected, got } => {
                write!(f, "agent {agent} at {vertex}: executed {got} ticks, needs {expected}")
            }
            Violation::WindowNotOccupied { agent, vertex, tick } => {
                write!(f, "agent {agent}: not at {vertex} during its task at tick {tick}")
            }
            Violation::NotATask { agent, vertex } => write!(f, "agent {agent}: window at non-task vertex {vertex}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub violations: Vec<Violation>,
    /// Sum over agents of the last tick of each path.
    pub cost: u64,
}

impl Report {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks a joint path against every requirement of the problem.
///
/// With `windows`, each reported window must lie on the agent's path and
/// last exactly the task's duration. Without them, a task counts as done
/// when some eligible agent stays at it for duration + 1 consecutive ticks
/// (the final rest counts as unbounded).
pub fn verify_solution(inst: &Instance, paths: &[Vec<VertexId>], windows: Option<&[Vec<TaskWindow>]>) -> Report {
    check(inst, paths, windows, &|a, v| inst.duration(a, v))
}

/// As [`verify_solution`], with required durations supplied by `duration`.
pub fn check(
    inst: &Instance,
    paths: &[Vec<VertexId>],
    windows: Option<&[Vec<TaskWindow>]>,
    duration: &dyn Fn(AgentId, VertexId) -> Option<Duration>,
) -> Report {
    let mut out = Vec::new();
    let n = inst.num_agents();
    if paths.len() != n {
        out.push(Violation::AgentCount { expected: n, got: paths.len() });
        return Report { violations: out, cost: 0 };
    }
    if let Some(p) = paths.iter().position(|p| p.is_empty()) {
        out.push(Violation::EmptyPath { agent: p });
        return Report { violations: out, cost: 0 };
    }
    let cost = paths.iter().map(|p| p.len() as u64 - 1).sum();
    let graph = inst.graph();
    for (a, p) in paths.iter().enumerate() {
        if p[0] != inst.starts[a] {
            out.push(Violation::WrongStart { agent: a });
        }
        for (t, w) in p.windows(2).enumerate() {
            if w[0] != w[1] && !graph.adjacent(w[0], w[1]) {
                out.push(Violation::IllegalMove { agent: a, tick: t as Tick });
            }
        }
    }

    let at = |a: usize, t: usize| paths[a][t.min(paths[a].len() - 1)];
    let horizon = paths.iter().map(Vec::len).max().unwrap_or(1) - 1;
    for t in 0..=horizon {
        for i in 0..n {
            for j in i + 1..n {
                if at(i, t) == at(j, t) {
                    out.push(Violation::VertexConflict { i, j, vertex: at(i, t), tick: t as Tick });
                }
                if t < horizon {
                    let (a, b) = (at(i, t), at(i, t + 1));
                    if a != b && at(j, t) == b && at(j, t + 1) == a {
                        out.push(Violation::EdgeConflict { i, j, edge: (a, b), tick: t as Tick });
                    }
                }
            }
        }
    }

    let mut goals = BTreeSet::new();
    for (a, p) in paths.iter().enumerate() {
        let g = *p.last().unwrap();
        if !inst.is_goal(g) || !inst.is_eligible(a, g) {
            out.push(Violation::BadGoal { agent: a, vertex: g });
        }
        if !goals.insert(g) {
            out.push(Violation::SharedGoal { vertex: g });
        }
    }

    let mut done: BTreeMap<VertexId, usize> = BTreeMap::new();
    match windows {
        Some(windows) => {
            for (a, list) in windows.iter().enumerate().take(n) {
                for w in list {
                    let v = w.vertex;
                    if inst.is_goal(v) {
                        // Goal windows are checked through the final position.
                    } else if !inst.targets.contains(&v) {
                        out.push(Violation::NotATask { agent: a, vertex: v });
                        continue;
                    }
                    let Some(tau) = duration(a, v) else {
                        out.push(Violation::IneligibleAgent { agent: a, vertex: v });
                        continue;
                    };
                    if w.end < w.start || w.end - w.start != tau {
                        out.push(Violation::WrongDuration {
                            agent: a,
                            vertex: v,
                            expected: tau,
                            got: w.end.saturating_sub(w.start),
                        });
                    }
                    if let Some(t) = (w.start..=w.end.max(w.start)).find(|&t| at(a, t as usize) != v) {
                        out.push(Violation::WindowNotOccupied { agent: a, vertex: v, tick: t });
                    }
                    if !inst.is_goal(v) {
                        *done.entry(v).or_default() += 1;
                    }
                }
            }
        }
        None => {
            for &v in &inst.targets {
                let hit = paths.iter().enumerate().any(|(a, p)| {
                    let Some(tau) = duration(a, v) else { return false };
                    longest_stay(p, v) > tau as usize
                });
                if hit {
                    done.insert(v, 1);
                }
            }
        }
    }
    for &v in &inst.targets {
        match done.get(&v).copied().unwrap_or(0) {
            0 => out.push(Violation::TaskNotExecuted { vertex: v }),
            1 => {}
            _ => out.push(Violation::TaskExecutedTwice { vertex: v }),
        }
    }
    for (a, p) in paths.iter().enumerate() {
        let g = *p.last().unwrap();
        if let (Some(tau), Some(list)) = (duration(a, g), windows.and_then(|w| w.get(a))) {
            if tau > 0 && !list.iter().any(|w| w.vertex == g) {
                out.push(Violation::TaskNotExecuted { vertex: g });
            }
        }
    }
    Report { violations: out, cost }
}

/// Longest run of consecutive ticks at `v`; unbounded if the path ends there.
fn longest_stay(p: &[VertexId], v: VertexId) -> usize {
    if p.last() == Some(&v) {
        return usize::MAX;
    }
    let mut best = 0;
    let mut run = 0;
    for &u in p {
        run = if u == v { run + 1 } else { 0 };
        best = best.max(run);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workspace::toy4x4;

    fn optimal() -> Vec<Vec<VertexId>> {
        vec![vec![8, 9, 9, 9, 10, 10, 11], vec![1, 5, 5, 5, 9, 13], vec![2, 6, 6, 6, 6, 6, 10, 14]]
    }

    #[test]
    fn toy_optimum_is_valid() {
        let r = verify_solution(&toy4x4(), &optimal(), None);
        assert!(r.is_ok(), "{:?}", r.violations);
        assert_eq!(r.cost, 18);
    }

    #[test]
    fn naive_duration_injection_conflicts() {
        let paths = vec![vec![8, 9, 9, 9, 10, 10, 11], vec![1, 5, 9, 13], vec![2, 6, 6, 6, 6, 6, 6, 10, 14]];
        let r = verify_solution(&toy4x4(), &paths, None);
        assert!(r.violations.iter().any(|v| matches!(v, Violation::VertexConflict { vertex: 9, .. })));
    }

    #[test]
    fn skipped_target_is_reported() {
        let mut paths = optimal();
        paths[0] = vec![8, 9, 9, 9, 10, 11];
        let r = verify_solution(&toy4x4(), &paths, None);
        assert!(r.violations.contains(&Violation::TaskNotExecuted { vertex: 10 }));
    }

    #[test]
    fn windows_must_match_durations() {
        let windows = vec![
            vec![TaskWindow { vertex: 9, start: 1, end: 2 }, TaskWindow { vertex: 10, start: 4, end: 5 }],
            vec![],
            vec![TaskWindow { vertex: 6, start: 1, end: 5 }],
        ];
        let r = verify_solution(&toy4x4(), &optimal(), Some(&windows));
        assert_eq!(r.violations, vec![Violation::WrongDuration { agent: 0, vertex: 9, expected: 2, got: 1 }]);
    }

    #[test]
    fn illegal_jump() {
        let mut paths = optimal();
        paths[1] = vec![1, 9, 13];
        let r = verify_solution(&toy4x4(), &paths, None);
        assert!(r.violations.contains(&Violation::IllegalMove { agent: 1, tick: 0 }));
    }
}
