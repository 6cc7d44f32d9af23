use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cbss::{count_conflicts, detect_conflict, generate_constraints, Branching, Conflict};
use crate::error::{Error, Result};
use crate::lowlevel::{plan_agent_path, Constraint, ConstraintSet, Distances, Path};
use crate::sequencing::{
    compute_target_graph, transform, ExactSolver, ExternalSolver, JointSequence, KBest, SequencingBackend,
};
use crate::workspace::{validate_instance, Instance};

#[derive(Debug, Clone, Default)]
pub enum Backend {
    #[default]
    Exact,
    External(ExternalSolver),
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Root-switch slack; 0 keeps the search optimal.
    pub eps: f64,
    pub time_limit: Option<Duration>,
    pub branching: Branching,
    pub backend: Backend,
    /// Use the single-copy transformation when the instance allows it.
    pub simplify: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { eps: 0.0, time_limit: None, branching: Branching::New, backend: Backend::Exact, simplify: true }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub nodes: u64,
    pub conflicts_resolved: u64,
    pub roots: u64,
    pub sequencing_calls: u64,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub cost: u64,
    pub paths: Vec<Path>,
    pub stats: Stats,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Solved(Solution),
    Timeout(Stats),
    Infeasible(Stats),
}

impl Outcome {
    pub fn solution(&self) -> Option<&Solution> {
        match self {
            Outcome::Solved(s) => Some(s),
            _ => None,
        }
    }

    pub fn stats(&self) -> &Stats {
        match self {
            Outcome::Solved(s) => &s.stats,
            Outcome::Timeout(s) | Outcome::Infeasible(s) => s,
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            Outcome::Solved(_) => "solved",
            Outcome::Timeout(_) => "timeout",
            Outcome::Infeasible(_) => "infeasible",
        }
    }
}

/// Search progress reported to an observer.
#[derive(Debug, Clone)]
pub enum SearchEvent<'a> {
    /// A new root for a joint sequence.
    Root { sequence: &'a JointSequence, g: u64 },
    /// A node taken from OPEN for expansion.
    Expand { g: u64, constraints: usize },
    /// A conflict and the constraint sets of its two children.
    Branch { conflict: &'a Conflict, paths: &'a [Path], first: &'a [Constraint], second: &'a [Constraint] },
}

struct CtNode {
    paths: Vec<Arc<Path>>,
    constraints: Vec<Arc<ConstraintSet>>,
    sequence: Arc<JointSequence>,
    g: u64,
}

struct Context<'a> {
    inst: &'a Instance,
    dist: Distances,
    open: BTreeMap<(u64, usize, u64), CtNode>,
    next_id: u64,
    stats: Stats,
}

impl Context<'_> {
    fn push(&mut self, node: CtNode, conflicts: usize) {
        self.open.insert((node.g, conflicts, self.next_id), node);
        self.next_id += 1;
    }

    fn make_root(&mut self, seq: JointSequence, observer: &mut dyn FnMut(&SearchEvent)) {
        let n = self.inst.num_agents();
        let empty = Arc::new(ConstraintSet::new());
        let (inst, dist) = (self.inst, &self.dist);
        let planned: Option<Vec<Path>> =
            (0..n).into_par_iter().map(|a| plan_agent_path(inst, dist, a, &seq.sequences[a], &empty)).collect();
        let Some(paths) = planned else { return };
        let g = paths.iter().map(Path::cost).sum();
        self.stats.roots += 1;
        observer(&SearchEvent::Root { sequence: &seq, g });
        let conflicts = count_conflicts(&paths);
        let node = CtNode {
            paths: paths.into_iter().map(Arc::new).collect(),
            constraints: vec![empty; n],
            sequence: Arc::new(seq),
            g,
        };
        self.push(node, conflicts);
    }
}

/// Optimal MCPF-D search: best-first over constraint trees rooted at
/// joint sequences from K-best enumeration, adding a new root whenever the
/// cheapest open node costs more than the next unexpanded sequence.
pub fn solve_cbss_d(inst: &Instance, cfg: &SolverConfig) -> Result<Outcome> {
    solve_cbss_d_observed(inst, cfg, &mut |_| {})
}

pub fn solve_cbss_d_observed(
    inst: &Instance,
    cfg: &SolverConfig,
    observer: &mut dyn FnMut(&SearchEvent),
) -> Result<Outcome> {
    let started = Instant::now();
    let deadline = cfg.time_limit.map(|d| started + d);
    let violations = validate_instance(inst);
    if !violations.is_empty() {
        let msgs: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::Instance(msgs.join("; ")));
    }
    if cfg.eps.is_nan() || cfg.eps < 0.0 {
        return Err(Error::Config(format!("eps must be nonnegative, got {}", cfg.eps)));
    }
    let tg = Arc::new(compute_target_graph(inst)?);
    let graph = Arc::new(transform(inst, &tg, cfg.simplify)?);
    let backend: Arc<dyn SequencingBackend> = match &cfg.backend {
        Backend::Exact => Arc::new(ExactSolver::default()),
        Backend::External(e) => Arc::new(e.clone()),
    };
    let mut ctx =
        Context { inst, dist: Distances::new(inst), open: BTreeMap::new(), next_id: 0, stats: Stats::default() };
    let finish = |ctx: &Context, kbest: Option<&KBest>| {
        let mut s = ctx.stats;
        s.sequencing_calls = kbest.map_or(s.sequencing_calls, |k| k.sequencing_calls() as u64);
        s.wall_ms = started.elapsed().as_millis() as u64;
        s
    };
    let mut kbest = match KBest::new(Arc::new(inst.clone()), tg, graph, backend, deadline) {
        Ok(k) => k,
        Err(Error::Timeout) => return Ok(Outcome::Timeout(finish(&ctx, None))),
        Err(e) => return Err(e),
    };

    let result = search(&mut ctx, &mut kbest, cfg, deadline, observer);
    let stats = finish(&ctx, Some(&kbest));
    match result {
        Ok(Some(paths)) => {
            let cost = paths.iter().map(Path::cost).sum();
            Ok(Outcome::Solved(Solution { cost, paths, stats }))
        }
        Ok(None) => Ok(Outcome::Infeasible(stats)),
        Err(Error::Timeout) => Ok(Outcome::Timeout(stats)),
        Err(e) => Err(e),
    }
}

fn search(
    ctx: &mut Context,
    kbest: &mut KBest,
    cfg: &SolverConfig,
    deadline: Option<Instant>,
    observer: &mut dyn FnMut(&SearchEvent),
) -> Result<Option<Vec<Path>>> {
    let expired = || deadline.is_some_and(|d| Instant::now() >= d);
    loop {
        if expired() {
            return Err(Error::Timeout);
        }
        if ctx.open.is_empty() {
            match kbest.next()? {
                Some(seq) => {
                    ctx.make_root(seq, observer);
                    continue;
                }
                None => return Ok(None),
            }
        }
        // Open a new root while the cheapest node is dearer than the next sequence.
        let (key, node) = loop {
            let (key, node) = ctx.open.pop_first().unwrap();
            match kbest.peek_cost() {
                Some(c) if node.g as f64 > (1.0 + cfg.eps) * c as f64 => {
                    ctx.open.insert(key, node);
                    if let Some(seq) = kbest.next()? {
                        ctx.make_root(seq, observer);
                    }
                }
                _ => break (key, node),
            }
        };
        let _ = key;
        ctx.stats.nodes += 1;
        observer(&SearchEvent::Expand { g: node.g, constraints: node.constraints.iter().map(|c| c.len()).sum() });

        let paths: Vec<Path> = node.paths.iter().map(|p| (**p).clone()).collect();
        let Some(conflict) = detect_conflict(&paths) else {
            return Ok(Some(paths));
        };
        ctx.stats.conflicts_resolved += 1;
        let (first, second) = generate_constraints(&conflict, &paths, cfg.branching);
        observer(&SearchEvent::Branch { conflict: &conflict, paths: &paths, first: &first, second: &second });

        for (agent, omega) in [(conflict.i, first), (conflict.j, second)] {
            let mut set = (*node.constraints[agent]).clone();
            let mut added = false;
            for c in omega {
                added |= set.insert(c);
            }
            if !added {
                continue;
            }
            let Some(path) = plan_agent_path(ctx.inst, &ctx.dist, agent, &node.sequence.sequences[agent], &set) else {
                continue;
            };
            let mut child_paths = node.paths.clone();
            let mut child_constraints = node.constraints.clone();
            child_paths[agent] = Arc::new(path);
            child_constraints[agent] = Arc::new(set);
            let g = child_paths.iter().map(|p| p.cost()).sum();
            let plain: Vec<Path> = child_paths.iter().map(|p| (**p).clone()).collect();
            let conflicts = count_conflicts(&plain);
            let child =
                CtNode { paths: child_paths, constraints: child_constraints, sequence: node.sequence.clone(), g };
            ctx.push(child, conflicts);
        }
    }
}
