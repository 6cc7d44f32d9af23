use std::collections::HashMap;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::sequencing::{assign, ClusterKind, TransformedGraph};

/// Closed tour over all nodes, starting at the first agent's start.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tour {
    pub cost: u64,
    pub nodes: Vec<usize>,
}

/// Arc constraints for one sequencing subproblem.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ArcSet {
    pub include: Vec<(usize, usize)>,
    pub exclude: Vec<(usize, usize)>,
}

/// A solver for the transformed sequencing problem.
///
/// `Ok(None)` means no tour satisfies the constraints.
pub trait SequencingBackend: Send + Sync {
    fn solve(&self, g: &TransformedGraph, arcs: &ArcSet, deadline: Option<Instant>) -> Result<Option<Tour>>;
}

/// Exact branch and bound over cluster-contiguous tours.
///
/// When no agent is eligible for more than `split_limit` targets the tour
/// is searched as one walk per agent (see `assign`). Otherwise the search
/// extends a tour from the first start one cluster at a time,
/// choosing the entry copy (which fixes the ring walk and the exit copy).
/// Starts are entered in ascending order. Children are tried in ascending
/// node id so the first optimum found is the lexicographically smallest.
/// Subtrees are cut with the larger of two admissible bounds (cheapest
/// admissible in-arc and out-arc per unvisited cluster) and by dominance
/// on (visited set, exit node).
#[derive(Debug, Clone)]
pub struct ExactSolver {
    /// Cap on remembered dominance states.
    pub memo_limit: usize,
    /// Largest per-agent target count searched agent by agent.
    pub split_limit: usize,
}

impl Default for ExactSolver {
    fn default() -> Self {
        Self { memo_limit: 1 << 22, split_limit: 12 }
    }
}

impl SequencingBackend for ExactSolver {
    fn solve(&self, g: &TransformedGraph, arcs: &ArcSet, deadline: Option<Instant>) -> Result<Option<Tour>> {
        let Some(restriction) = Restriction::new(g, arcs) else {
            return Ok(None);
        };
        if let Some(found) = assign::solve(g, &restriction, self.split_limit, deadline) {
            return Ok(found?.map(|(mass, entries)| Tour { cost: g.offset() + mass, nodes: expand(g, &entries) }));
        }
        let mut search = Search::new(g, restriction, deadline, self.memo_limit);
        search.greedy();
        search.run()?;
        Ok(search.best_tour.as_ref().map(|t| Tour { cost: g.offset() + search.best, nodes: expand(g, t) }))
    }
}

/// Full tour from the entry node of every cluster after the first start.
fn expand(g: &TransformedGraph, entries: &[usize]) -> Vec<usize> {
    let mut tour = vec![g.start_node(0)];
    for &c in entries {
        let exit = g.ring_exit(c);
        let mut u = c;
        loop {
            tour.push(u);
            if u == exit {
                break;
            }
            u = g.ring_next(u);
        }
    }
    tour
}

/// Arc constraints resolved against a graph.
pub(super) struct Restriction {
    pub n: usize,
    /// Row-major; forced arcs exclude every competitor at both ends.
    pub allowed: Vec<bool>,
    /// Whether the ring walk from this entry copy uses only allowed arcs.
    pub entry_ok: Vec<bool>,
    pub exit: Vec<usize>,
}

impl Restriction {
    /// `None` when the constraints are contradictory on their face.
    pub fn new(g: &TransformedGraph, arcs: &ArcSet) -> Option<Self> {
        let n = g.num_nodes();
        let mut forced_out = vec![None; n];
        let mut forced_in = vec![None; n];
        for &(u, v) in &arcs.include {
            if u >= n || v >= n || g.arc(u, v).is_none() {
                return None;
            }
            if forced_out[u].is_some_and(|x| x != v) || forced_in[v].is_some_and(|x| x != u) {
                return None;
            }
            forced_out[u] = Some(v);
            forced_in[v] = Some(u);
        }
        let mut excluded = vec![false; n * n];
        for &(u, v) in &arcs.exclude {
            if u < n && v < n {
                if forced_out[u] == Some(v) {
                    return None;
                }
                excluded[u * n + v] = true;
            }
        }
        let mut allowed = vec![false; n * n];
        for u in 0..n {
            for v in 0..n {
                allowed[u * n + v] = g.arc(u, v).is_some()
                    && !excluded[u * n + v]
                    && forced_out[u].is_none_or(|x| x == v)
                    && forced_in[v].is_none_or(|x| x == u);
            }
        }
        let mut entry_ok = vec![true; n];
        let mut exit = vec![0; n];
        for c in 0..n {
            exit[c] = g.ring_exit(c);
            let mut u = c;
            while u != exit[c] {
                let w = g.ring_next(u);
                if !allowed[u * n + w] {
                    entry_ok[c] = false;
                    break;
                }
                u = w;
            }
        }
        Some(Self { n, allowed, entry_ok, exit })
    }

    pub fn allowed(&self, u: usize, v: usize) -> bool {
        self.allowed[u * self.n + v]
    }
}

struct Search<'a> {
    g: &'a TransformedGraph,
    n: usize,
    allowed: Vec<bool>,
    entry_ok: Vec<bool>,
    exit: Vec<usize>,
    /// Per node, admissible in-arcs (mass, pred) sorted ascending.
    in_arcs: Vec<Vec<(u32, usize)>>,
    /// Per node, admissible out-arcs (mass, succ) sorted ascending.
    out_arcs: Vec<Vec<(u32, usize)>>,
    /// Per node, admissible entry successors in ascending id.
    succ_ids: Vec<Vec<usize>>,
    starts: Vec<usize>,
    visited: Vec<bool>,
    bits: Vec<u64>,
    entries: Vec<usize>,
    best: u64,
    best_tour: Option<Vec<usize>>,
    from_main: bool,
    memo: HashMap<(Vec<u64>, usize), u64>,
    memo_limit: usize,
    deadline: Option<Instant>,
    expansions: u64,
    budget: Option<u64>,
}

impl<'a> Search<'a> {
    fn new(g: &'a TransformedGraph, restriction: Restriction, deadline: Option<Instant>, memo_limit: usize) -> Self {
        let Restriction { n, allowed, entry_ok, exit } = restriction;
        let cluster = |u: usize| g.nodes()[u].cluster;
        let mut in_arcs = vec![Vec::new(); n];
        let mut out_arcs = vec![Vec::new(); n];
        let mut succ_ids = vec![Vec::new(); n];
        for u in 0..n {
            for v in 0..n {
                if cluster(u) == cluster(v) || !allowed[u * n + v] || !entry_ok[v] {
                    continue;
                }
                let m = g.mass(u, v).unwrap();
                in_arcs[v].push((m, u));
                out_arcs[u].push((m, v));
                succ_ids[u].push(v);
            }
        }
        for l in in_arcs.iter_mut().chain(out_arcs.iter_mut()) {
            l.sort_unstable();
        }
        let starts: Vec<usize> = (0..g.num_agents()).map(|a| g.start_node(a)).collect();
        let nc = g.clusters().len();
        Self {
            g,
            n,
            allowed,
            entry_ok,
            exit,
            in_arcs,
            out_arcs,
            succ_ids,
            starts,
            visited: vec![false; nc],
            bits: vec![0; nc.div_ceil(64)],
            entries: Vec::new(),
            best: u64::MAX,
            best_tour: None,
            from_main: false,
            memo: HashMap::new(),
            memo_limit,
            deadline,
            expansions: 0,
            budget: None,
        }
    }

    fn cluster(&self, u: usize) -> usize {
        self.g.nodes()[u].cluster
    }

    fn mark(&mut self, c: usize, on: bool) {
        self.visited[c] = on;
        if on {
            self.bits[c / 64] |= 1 << (c % 64);
        } else {
            self.bits[c / 64] &= !(1 << (c % 64));
        }
    }

    /// Admissible bound on the mass still to be paid from exit node `cur`.
    fn bound(&self, cur: usize) -> Option<u64> {
        let g = self.g;
        let open = |u: usize| u == cur || !self.visited[self.cluster(u)];
        let mut lb_in = 0u64;
        let mut lb_out = 0u64;
        let mut remaining = 0usize;
        for (ci, c) in g.clusters().iter().enumerate() {
            if self.visited[ci] {
                continue;
            }
            remaining += 1;
            let mut best_in = u32::MAX;
            let mut best_out = u32::MAX;
            for &m in &c.members {
                if !self.entry_ok[m] {
                    continue;
                }
                if let Some(&(w, _)) = self.in_arcs[m].iter().find(|&&(_, u)| open(u)) {
                    best_in = best_in.min(w);
                }
                let x = self.exit[m];
                let to_open = |v: usize| v == 0 || !self.visited[self.cluster(v)];
                if let Some(&(w, _)) = self.out_arcs[x].iter().find(|&&(_, v)| to_open(v)) {
                    best_out = best_out.min(w);
                }
            }
            if best_in == u32::MAX || best_out == u32::MAX {
                return None;
            }
            lb_in += best_in as u64;
            lb_out += best_out as u64;
        }
        // Closing arc into the first start and the arc out of `cur`.
        let close = if remaining == 0 {
            if !self.allowed[cur * self.n] {
                return None;
            }
            self.g.mass(cur, 0)? as u64
        } else {
            let pred_open = |u: usize| !self.visited[self.cluster(u)];
            self.in_arcs[0].iter().find(|&&(_, u)| pred_open(u)).map(|&(w, _)| w as u64)?
        };
        lb_in += close;
        let leave = if remaining == 0 {
            close
        } else {
            let to_open = |v: usize| !self.visited[self.cluster(v)];
            self.out_arcs[cur].iter().find(|&&(_, v)| to_open(v)).map(|&(w, _)| w as u64)?
        };
        lb_out += leave;
        Some(lb_in.max(lb_out))
    }

    fn next_start(&self) -> Option<usize> {
        self.starts.iter().copied().find(|&s| !self.visited[self.cluster(s)])
    }

    fn tick(&mut self) -> Result<bool> {
        self.expansions += 1;
        if self.expansions.is_multiple_of(4096) {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    return Err(Error::Timeout);
                }
            }
        }
        Ok(self.budget.is_some_and(|b| self.expansions > b))
    }

    fn prune(&self, g: u64, lb: u64) -> bool {
        let total = g.saturating_add(lb);
        total > self.best || (total == self.best && self.from_main)
    }

    fn candidates(&self, cur: usize, ordered: bool) -> Vec<usize> {
        let next_start = self.next_start();
        let mut out: Vec<usize> = self.succ_ids[cur]
            .iter()
            .copied()
            .filter(|&c| {
                let ci = self.cluster(c);
                !self.visited[ci] && (self.g.clusters()[ci].kind != ClusterKind::Start || Some(c) == next_start)
            })
            .collect();
        if !ordered {
            out.sort_by_key(|&c| (self.g.mass(cur, c), c));
        }
        out
    }

    fn dfs(&mut self, cur: usize, g: u64, remaining: usize, ordered: bool) -> Result<bool> {
        if self.tick()? {
            return Ok(true);
        }
        if remaining == 0 {
            if self.allowed[cur * self.n] {
                let total = g + self.g.mass(cur, 0).unwrap() as u64;
                let better = total < self.best || (total == self.best && !self.from_main);
                if better {
                    self.best = total;
                    self.best_tour = Some(self.entries.clone());
                    self.from_main = ordered;
                }
            }
            return Ok(false);
        }
        let Some(lb) = self.bound(cur) else { return Ok(false) };
        if self.prune(g, lb) {
            return Ok(false);
        }
        if ordered && self.memo.len() < self.memo_limit {
            let key = (self.bits.clone(), cur);
            match self.memo.get_mut(&key) {
                Some(prev) if *prev <= g => return Ok(false),
                Some(prev) => *prev = g,
                None => {
                    self.memo.insert(key, g);
                }
            }
        } else if ordered {
            if let Some(&prev) = self.memo.get(&(self.bits.clone(), cur)) {
                if prev <= g {
                    return Ok(false);
                }
            }
        }
        for c in self.candidates(cur, ordered) {
            let ci = self.cluster(c);
            let step = self.g.mass(cur, c).unwrap() as u64;
            if self.prune(g + step, 0) {
                if ordered {
                    continue;
                }
                break;
            }
            self.mark(ci, true);
            self.entries.push(c);
            let stop = self.dfs(self.exit[c], g + step, remaining - 1, ordered)?;
            self.entries.pop();
            self.mark(ci, false);
            if stop || (!ordered && self.best_tour.is_some()) {
                return Ok(stop);
            }
        }
        Ok(false)
    }

    /// Depth-first descent on cheapest arcs for an initial bound.
    fn greedy(&mut self) {
        self.budget = Some(20_000);
        let nc = self.g.clusters().len();
        self.mark(0, true);
        let _ = self.dfs(0, 0, nc - 1, false);
        self.mark(0, false);
        self.budget = None;
        self.expansions = 0;
    }

    fn run(&mut self) -> Result<()> {
        let nc = self.g.clusters().len();
        self.mark(0, true);
        let r = self.dfs(0, 0, nc - 1, true);
        self.mark(0, false);
        r.map(|_| ())
    }
}
