use std::collections::HashMap;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::sequencing::solver::Restriction;
use crate::sequencing::{ClusterKind, TransformedGraph};

const INF: u64 = u64::MAX / 4;

/// A task cluster as seen by one agent.
#[derive(Debug, Clone, Copy)]
struct Item {
    entry: usize,
    exit: usize,
}

struct AgentView {
    start: usize,
    next_start: usize,
    targets: Vec<Item>,
    goals: Vec<Item>,
    /// `[mask * goals + g]`: cheapest unrestricted walk from the start
    /// through exactly `mask` and into goal `g`.
    relaxed: Vec<u64>,
    /// `[mask]`: minimum of `relaxed` over goals.
    relaxed_any: Vec<u64>,
    /// Least cost saved by dropping a target from any walk.
    saving: Vec<u64>,
}

#[derive(Debug, Clone, Copy)]
struct Choice {
    agent: usize,
    local: usize,
    goal: bool,
}

/// Result of the decomposed search: tour mass and entry nodes in tour
/// order (starts of agents after the first included).
pub(super) type Found = Option<(u64, Vec<usize>)>;

/// Exact search over the assignment of clusters to agents.
///
/// Every cluster-contiguous tour is a set of per-agent walks, so the search
/// branches on which agent enters each cluster and prices a finished walk
/// by dynamic programming over its target subsets. Partial assignments are
/// bounded by unrestricted per-agent walk costs, which only grow as targets
/// are added. Ties are broken towards the lexicographically smallest
/// sequence of entry nodes.
///
/// Returns `None` when some agent is eligible for more than `limit` targets.
pub(super) fn solve(
    g: &TransformedGraph,
    r: &Restriction,
    limit: usize,
    deadline: Option<Instant>,
) -> Option<Result<Found>> {
    let n_agents = g.num_agents();
    let mut views: Vec<AgentView> = (0..n_agents)
        .map(|a| AgentView {
            start: g.start_node(a),
            next_start: g.start_node((a + 1) % n_agents),
            targets: Vec::new(),
            goals: Vec::new(),
            relaxed: Vec::new(),
            relaxed_any: Vec::new(),
            saving: Vec::new(),
        })
        .collect();
    let mut decisions: Vec<Vec<Choice>> = Vec::new();
    for c in g.clusters() {
        if c.kind == ClusterKind::Start {
            continue;
        }
        let goal = c.kind == ClusterKind::Goal;
        let mut choices = Vec::new();
        for a in 0..n_agents {
            let Some(&entry) = c.members.iter().find(|&&m| g.nodes()[m].agent.is_none_or(|q| q == a)) else {
                continue;
            };
            if !r.entry_ok[entry] {
                continue;
            }
            let item = Item { entry, exit: r.exit[entry] };
            let v = &mut views[a];
            let list = if goal { &mut v.goals } else { &mut v.targets };
            choices.push(Choice { agent: a, local: list.len(), goal });
            list.push(item);
        }
        decisions.push(choices);
    }
    if views.iter().any(|v| v.targets.len() > limit) {
        return None;
    }
    Some(Assign::new(g, r, views, decisions, deadline).run())
}

fn mass(g: &TransformedGraph, u: usize, v: usize) -> u64 {
    g.mass(u, v).map_or(INF, |m| m as u64)
}

fn relax(g: &TransformedGraph, v: &mut AgentView) {
    let t = v.targets.len();
    let ng = v.goals.len();
    let full = 1usize << t;
    let mut fwd = vec![INF; full * t];
    for j in 0..t {
        fwd[(1 << j) * t + j] = mass(g, v.start, v.targets[j].entry);
    }
    for mask in 1..full {
        for j in 0..t {
            if mask & (1 << j) == 0 {
                continue;
            }
            let rest = mask & !(1 << j);
            if rest == 0 {
                continue;
            }
            let mut best = INF;
            for i in 0..t {
                if rest & (1 << i) != 0 {
                    let c = fwd[rest * t + i] + mass(g, v.targets[i].exit, v.targets[j].entry);
                    best = best.min(c);
                }
            }
            fwd[mask * t + j] = best.min(INF);
        }
    }
    v.relaxed = vec![INF; full * ng];
    v.relaxed_any = vec![INF; full];
    for mask in 0..full {
        for (gi, goal) in v.goals.iter().enumerate() {
            let c = if mask == 0 {
                mass(g, v.start, goal.entry)
            } else {
                (0..t)
                    .filter(|&j| mask & (1 << j) != 0)
                    .map(|j| fwd[mask * t + j] + mass(g, v.targets[j].exit, goal.entry))
                    .min()
                    .unwrap_or(INF)
            };
            let c = c.min(INF);
            v.relaxed[mask * ng + gi] = c;
            v.relaxed_any[mask] = v.relaxed_any[mask].min(c);
        }
    }
    let mut saving = vec![0; t];
    for (k, item) in v.targets.iter().enumerate() {
        let preds =
            std::iter::once(v.start).chain(v.targets.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, x)| x.exit));
        let mut best = INF;
        for p in preds {
            let into = mass(g, p, item.entry);
            let succs = v
                .targets
                .iter()
                .enumerate()
                .filter(|&(i, x)| i != k && x.exit != p)
                .map(|(_, x)| x)
                .chain(v.goals.iter());
            for s in succs {
                let detour = into + mass(g, item.exit, s.entry);
                best = best.min(detour.saturating_sub(mass(g, p, s.entry)));
            }
        }
        saving[k] = if best >= INF { 0 } else { best };
    }
    v.saving = saving;
}

struct Assign<'a> {
    g: &'a TransformedGraph,
    r: &'a Restriction,
    views: Vec<AgentView>,
    decisions: Vec<Vec<Choice>>,
    /// Suffix sums of the least saving per undecided target.
    pending: Vec<u64>,
    mask: Vec<usize>,
    goal: Vec<Option<usize>>,
    /// Undecided clusters each agent is still a candidate for.
    open: Vec<usize>,
    lb: Vec<u64>,
    /// Sum of the finite entries of `lb`.
    lb_sum: u64,
    infinite: usize,
    exact: HashMap<(usize, usize, usize), Found>,
    best: u64,
    best_entries: Option<Vec<usize>>,
    deadline: Option<Instant>,
    expansions: u64,
}

impl<'a> Assign<'a> {
    fn new(
        g: &'a TransformedGraph,
        r: &'a Restriction,
        mut views: Vec<AgentView>,
        decisions: Vec<Vec<Choice>>,
        deadline: Option<Instant>,
    ) -> Self {
        for v in views.iter_mut() {
            relax(g, v);
        }
        let n_agents = views.len();
        // Group decisions by the first candidate agent so walks close early.
        let mut decisions = decisions;
        decisions.sort_by_key(|d| {
            (d.iter().map(|c| c.agent).min().unwrap_or(usize::MAX), !d.first().is_some_and(|c| c.goal))
        });
        let mut pending = vec![0u64; decisions.len() + 1];
        for (d, choices) in decisions.iter().enumerate().rev() {
            let least = choices.iter().filter(|c| !c.goal).map(|c| views[c.agent].saving[c.local]).min().unwrap_or(0);
            pending[d] = pending[d + 1] + least;
        }
        let mut open = vec![0; n_agents];
        for c in decisions.iter().flatten() {
            open[c.agent] += 1;
        }
        let lb: Vec<u64> = views.iter().map(|v| v.relaxed_any[0]).collect();
        let lb_sum = lb.iter().filter(|&&x| x < INF).sum();
        let infinite = lb.iter().filter(|&&x| x >= INF).count();
        Self {
            g,
            r,
            views,
            decisions,
            pending,
            mask: vec![0; n_agents],
            goal: vec![None; n_agents],
            open,
            lb,
            lb_sum,
            infinite,
            exact: HashMap::new(),
            best: INF,
            best_entries: None,
            deadline,
            expansions: 0,
        }
    }

    fn run(mut self) -> Result<Found> {
        if self.decisions.iter().any(|d| d.is_empty()) {
            return Ok(None);
        }
        // Agents with no candidate cluster at all still need a goal.
        if (0..self.views.len()).any(|a| self.open[a] == 0) {
            return Ok(None);
        }
        self.dfs(0)?;
        Ok(self.best_entries.map(|e| (self.best, e)))
    }

    fn bound(&self, a: usize) -> u64 {
        let v = &self.views[a];
        match self.goal[a] {
            Some(gi) => v.relaxed[self.mask[a] * v.goals.len() + gi],
            None => v.relaxed_any[self.mask[a]],
        }
    }

    fn set_lb(&mut self, a: usize, x: u64) {
        if self.lb[a] >= INF {
            self.infinite -= 1;
        } else {
            self.lb_sum -= self.lb[a];
        }
        if x >= INF {
            self.infinite += 1;
        } else {
            self.lb_sum += x;
        }
        self.lb[a] = x;
    }

    fn total(&self) -> u64 {
        if self.infinite > 0 {
            INF
        } else {
            self.lb_sum
        }
    }

    /// Exact cost of agent `a` walking its current assignment, cached.
    fn close(&mut self, a: usize) -> u64 {
        let Some(gi) = self.goal[a] else { return INF };
        let key = (a, self.mask[a], gi);
        if !self.exact.contains_key(&key) {
            let walk = self.walk(a, self.mask[a], gi);
            self.exact.insert(key, walk);
        }
        self.exact[&key].as_ref().map_or(INF, |w| w.0)
    }

    /// Cheapest allowed walk for one agent, lexicographically smallest
    /// entry sequence among ties.
    fn walk(&self, a: usize, mask: usize, gi: usize) -> Option<(u64, Vec<usize>)> {
        let v = &self.views[a];
        let r = self.r;
        let goal = v.goals[gi];
        if !r.allowed(goal.exit, v.next_start) {
            return None;
        }
        let arc = |u: usize, w: usize| if r.allowed(u, w) { mass(self.g, u, w) } else { INF };
        let items: Vec<Item> = (0..v.targets.len()).filter(|&i| mask & (1 << i) != 0).map(|i| v.targets[i]).collect();
        let k = items.len();
        let full = (1usize << k) - 1;
        // h[rest * k + j]: cost from the exit of j through `rest` and the goal.
        let mut h = vec![INF; (full + 1) * k.max(1)];
        for rest in 0..=full {
            for j in 0..k {
                if rest & (1 << j) != 0 {
                    continue;
                }
                let x = if rest == 0 {
                    arc(items[j].exit, goal.entry)
                } else {
                    (0..k)
                        .filter(|&i| rest & (1 << i) != 0)
                        .map(|i| arc(items[j].exit, items[i].entry).saturating_add(h[(rest & !(1 << i)) * k + i]))
                        .min()
                        .unwrap()
                };
                h[rest * k + j] = x.min(INF);
            }
        }
        let value = |from: usize, rest: usize, i: usize| {
            arc(from, items[i].entry).saturating_add(h[(rest & !(1 << i)) * k + i])
        };
        let total =
            if k == 0 { arc(v.start, goal.entry) } else { (0..k).map(|i| value(v.start, full, i)).min().unwrap() };
        if total >= INF {
            return None;
        }
        let mut entries = Vec::with_capacity(k + 1);
        let (mut from, mut rest, mut left) = (v.start, full, total);
        while rest != 0 {
            let i = (0..k)
                .filter(|&i| rest & (1 << i) != 0 && value(from, rest, i) == left)
                .min_by_key(|&i| items[i].entry)
                .unwrap();
            entries.push(items[i].entry);
            left -= arc(from, items[i].entry);
            rest &= !(1 << i);
            from = items[i].exit;
        }
        entries.push(goal.entry);
        Some((total, entries))
    }

    fn tick(&mut self) -> Result<()> {
        self.expansions += 1;
        if self.expansions.is_multiple_of(4096) && self.deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(Error::Timeout);
        }
        Ok(())
    }

    fn leaf(&mut self) {
        let total = self.total();
        if total > self.best {
            return;
        }
        let mut entries = Vec::new();
        for a in 0..self.views.len() {
            if a > 0 {
                entries.push(self.views[a].start);
            }
            let key = (a, self.mask[a], self.goal[a].unwrap());
            entries.extend_from_slice(&self.exact[&key].as_ref().unwrap().1);
        }
        if total < self.best || self.best_entries.as_ref().is_none_or(|b| entries < *b) {
            self.best = total;
            self.best_entries = Some(entries);
        }
    }

    fn dfs(&mut self, depth: usize) -> Result<()> {
        self.tick()?;
        if depth == self.decisions.len() {
            if self.total() < INF {
                self.leaf();
            }
            return Ok(());
        }
        let choices = self.decisions[depth].clone();
        let mut order: Vec<(u64, Choice)> = Vec::with_capacity(choices.len());
        for &c in &choices {
            if c.goal && self.goal[c.agent].is_some() {
                continue;
            }
            self.apply(c, true);
            let x = self.bound(c.agent);
            let x = if self.open[c.agent] == 1 { x.max(self.close(c.agent)) } else { x };
            self.apply(c, false);
            order.push((x.saturating_sub(self.lb[c.agent]), c));
        }
        order.sort_by_key(|&(d, c)| (d, c.agent));
        for (_, c) in order {
            self.apply(c, true);
            let saved: Vec<(usize, u64)> = choices.iter().map(|o| (o.agent, self.lb[o.agent])).collect();
            for o in &choices {
                self.open[o.agent] -= 1;
            }
            for o in &choices {
                let a = o.agent;
                let x = if self.open[a] == 0 { self.close(a) } else { self.bound(a) };
                self.set_lb(a, x);
            }
            if self.total() < INF && self.total() + self.pending[depth + 1] <= self.best {
                self.dfs(depth + 1)?;
            }
            for o in &choices {
                self.open[o.agent] += 1;
            }
            for &(a, x) in saved.iter().rev() {
                self.set_lb(a, x);
            }
            self.apply(c, false);
        }
        Ok(())
    }

    fn apply(&mut self, c: Choice, on: bool) {
        if c.goal {
            self.goal[c.agent] = on.then_some(c.local);
        } else if on {
            self.mask[c.agent] |= 1 << c.local;
        } else {
            self.mask[c.agent] &= !(1 << c.local);
        }
    }
}
