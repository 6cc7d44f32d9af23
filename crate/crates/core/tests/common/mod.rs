//! Instance generators and brute-force reference solvers shared by the
//! integration tests. Nothing here calls the planners under test.

#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, VecDeque};

use mcpfd::lowlevel::Constraint;
use mcpfd::rng::SplitMix64;
use mcpfd::workspace::{Grid, Instance, TaskTable};
use mcpfd::{AgentId, VertexId};

pub const INF: u64 = u64::MAX / 4;

#[derive(Debug, Clone, Copy)]
pub struct Spec {
    pub width: usize,
    pub height: usize,
    pub agents: usize,
    pub targets: usize,
    /// 1: every task open to every agent; 2: own goal, two agents per target.
    pub scene: u8,
    pub tau: u32,
    /// Chance in percent that a cell is blocked.
    pub obstacles: u64,
}

/// A random connected grid with distinct starts, goals and targets.
/// Goals carry zero duration.
pub fn random_instance(seed: u64, spec: Spec) -> Instance {
    let mut rng = SplitMix64::new(seed);
    loop {
        let cells = spec.width * spec.height;
        let mut passable: Vec<bool> = (0..cells).map(|_| rng.below(100) >= spec.obstacles).collect();
        let Some(first) = (0..cells).find(|&v| passable[v]) else { continue };
        let reach = bfs_cells(spec.width, spec.height, &passable, first);
        let size = reach.iter().filter(|&&d| d != u32::MAX).count();
        if size * 2 < passable.iter().filter(|&&p| p).count() {
            continue;
        }
        for v in 0..cells {
            passable[v] = reach[v] != u32::MAX;
        }
        let free: Vec<VertexId> = (0..cells).filter(|&v| passable[v]).collect();
        let need = 2 * spec.agents + spec.targets;
        if free.len() < need {
            continue;
        }
        let picked = rng.sample(&free, need);
        let starts = picked[..spec.agents].to_vec();
        let goals = picked[spec.agents..2 * spec.agents].to_vec();
        let targets = picked[2 * spec.agents..].to_vec();
        let mut tasks: BTreeMap<VertexId, TaskTable> = BTreeMap::new();
        for (a, &g) in goals.iter().enumerate() {
            let table = match spec.scene {
                1 => (0..spec.agents).map(|b| (b, 0)).collect(),
                _ => [(a, 0)].into_iter().collect(),
            };
            tasks.insert(g, table);
        }
        for &t in &targets {
            let table = match spec.scene {
                1 => (0..spec.agents).map(|b| (b, spec.tau)).collect(),
                _ => {
                    let pair = rng.sample(&(0..spec.agents).collect::<Vec<_>>(), 2);
                    pair.into_iter().map(|b| (b, spec.tau)).collect()
                }
            };
            tasks.insert(t, table);
        }
        let grid = Grid::new(spec.width, spec.height, passable).unwrap();
        return Instance::new(grid, starts, goals, targets, tasks);
    }
}

fn neighbors4(width: usize, height: usize, v: VertexId) -> Vec<VertexId> {
    let (r, c) = (v / width, v % width);
    let mut out = Vec::with_capacity(4);
    if r > 0 {
        out.push(v - width);
    }
    if r + 1 < height {
        out.push(v + width);
    }
    if c > 0 {
        out.push(v - 1);
    }
    if c + 1 < width {
        out.push(v + 1);
    }
    out
}

fn bfs_cells(width: usize, height: usize, passable: &[bool], from: VertexId) -> Vec<u32> {
    let mut dist = vec![u32::MAX; passable.len()];
    let mut queue = VecDeque::from([from]);
    dist[from] = 0;
    while let Some(u) = queue.pop_front() {
        for w in neighbors4(width, height, u) {
            if passable[w] && dist[w] == u32::MAX {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

fn passable(inst: &Instance) -> Vec<bool> {
    let g = inst.grid();
    (0..g.num_cells()).map(|v| g.is_passable(v)).collect()
}

/// Passable neighbours of `v` plus `v` itself.
pub fn moves(inst: &Instance, v: VertexId) -> Vec<VertexId> {
    let g = inst.grid();
    let mut out = vec![v];
    out.extend(neighbors4(g.width(), g.height(), v).into_iter().filter(|&w| g.is_passable(w)));
    out
}

pub fn bfs(inst: &Instance, from: VertexId) -> Vec<u32> {
    let g = inst.grid();
    bfs_cells(g.width(), g.height(), &passable(inst), from)
}

/// Every complete joint sequence with its cost: each target assigned to an
/// eligible agent, every agent's targets in every order, every eligible
/// goal assignment. Cost is travel distance plus the duration of every
/// visited task.
pub fn enumerate_sequences(inst: &Instance) -> Vec<(u64, Vec<Vec<VertexId>>)> {
    let n = inst.num_agents();
    let dist: HashMap<VertexId, Vec<u32>> =
        inst.starts.iter().chain(&inst.targets).map(|&v| (v, bfs(inst, v))).collect();
    let mut goal_choices: Vec<Vec<VertexId>> = Vec::new();
    permute_goals(inst, 0, &mut Vec::new(), &mut goal_choices);
    let mut out = Vec::new();
    let m = inst.targets.len();
    let mut owner = vec![0usize; m];
    let options: Vec<Vec<AgentId>> = inst.targets.iter().map(|&t| inst.eligible(t).collect()).collect();
    if options.iter().any(Vec::is_empty) {
        return out;
    }
    let mut pick = vec![0usize; m];
    loop {
        for k in 0..m {
            owner[k] = options[k][pick[k]];
        }
        let per_agent: Vec<Vec<VertexId>> =
            (0..n).map(|a| (0..m).filter(|&k| owner[k] == a).map(|k| inst.targets[k]).collect()).collect();
        let orders: Vec<Vec<Vec<VertexId>>> = per_agent.iter().map(|s| permutations(s)).collect();
        for goals in &goal_choices {
            let mut idx = vec![0usize; n];
            loop {
                let seqs: Vec<Vec<VertexId>> = (0..n)
                    .map(|a| {
                        let mut s = vec![inst.starts[a]];
                        s.extend(&orders[a][idx[a]]);
                        s.push(goals[a]);
                        s
                    })
                    .collect();
                let mut cost = 0u64;
                for (a, s) in seqs.iter().enumerate() {
                    for w in s.windows(2) {
                        cost += dist[&w[0]][w[1]] as u64 + inst.duration(a, w[1]).unwrap() as u64;
                    }
                }
                out.push((cost, seqs));
                if !advance(&mut idx, &orders.iter().map(Vec::len).collect::<Vec<_>>()) {
                    break;
                }
            }
        }
        if !advance(&mut pick, &options.iter().map(Vec::len).collect::<Vec<_>>()) {
            break;
        }
    }
    out.sort();
    out
}

fn advance(idx: &mut [usize], limits: &[usize]) -> bool {
    for k in 0..idx.len() {
        idx[k] += 1;
        if idx[k] < limits[k] {
            return true;
        }
        idx[k] = 0;
    }
    false
}

fn permute_goals(inst: &Instance, a: usize, cur: &mut Vec<VertexId>, out: &mut Vec<Vec<VertexId>>) {
    if a == inst.num_agents() {
        out.push(cur.clone());
        return;
    }
    for &g in &inst.goals {
        if !cur.contains(&g) && inst.is_eligible(a, g) {
            cur.push(g);
            permute_goals(inst, a + 1, cur, out);
            cur.pop();
        }
    }
}

fn permutations(items: &[VertexId]) -> Vec<Vec<VertexId>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for k in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(k);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Minimum finishing tick for one agent that starts at `seq[0]` and
/// executes `seq[1..]` in order under `constraints`, found by breadth-first
/// search over (tick, vertex, progress, remaining execution). The goal is
/// executed last and the agent stays there forever.
pub fn single_agent_optimum(
    inst: &Instance,
    agent: AgentId,
    seq: &[VertexId],
    constraints: &[Constraint],
) -> Option<u64> {
    let tasks = &seq[1..];
    let last = tasks.len() - 1;
    let taus: Vec<u64> = tasks.iter().map(|&v| inst.duration(agent, v).unwrap() as u64).collect();
    let blocked = |v: VertexId, t: u64| {
        constraints
            .iter()
            .any(|c| matches!(*c, Constraint::Vertex { vertex, tick, .. } if vertex == v && tick as u64 == t))
    };
    let edge_blocked = |u: VertexId, v: VertexId, t: u64| {
        constraints.iter().any(
            |c| matches!(*c, Constraint::Edge { edge, tick, .. } if edge == (u.min(v), u.max(v)) && tick as u64 == t),
        )
    };
    let latest = constraints.iter().map(|c| c.tick() as u64).max().unwrap_or(0);
    let goal = tasks[last];
    let goal_free_from = |t: u64| (t..=latest + 1).all(|s| !blocked(goal, s));
    let horizon = latest + 2 + (inst.grid().num_cells() as u64 + 1) * seq.len() as u64 + taus.iter().sum::<u64>();
    // (vertex, next task, ticks still to stay)
    let mut layer: Vec<(VertexId, usize, u64)> = vec![(seq[0], 0, 0)];
    if blocked(seq[0], 0) {
        return None;
    }
    let mut seen: std::collections::HashSet<(VertexId, usize, u64)> = Default::default();
    for t in 0..=horizon {
        // Start executions at this tick.
        let mut now: Vec<(VertexId, usize, u64)> = Vec::new();
        for &(v, k, stay) in &layer {
            now.push((v, k, stay));
            if stay == 0 && v == tasks[k] {
                if k == last {
                    if goal_free_from(t) {
                        return Some(t + taus[k]);
                    }
                } else {
                    let ok = (t..=t + taus[k]).all(|s| !blocked(v, s));
                    if ok {
                        now.push((v, k + 1, taus[k]));
                    }
                }
            }
        }
        let mut next = Vec::new();
        seen.clear();
        for (v, k, stay) in now {
            let succ: Vec<VertexId> = if stay > 0 { vec![v] } else { moves(inst, v) };
            for w in succ {
                if blocked(w, t + 1) || (w != v && edge_blocked(v, w, t)) {
                    continue;
                }
                let s = (w, k, stay.saturating_sub(1));
                if seen.insert(s) {
                    next.push(s);
                }
            }
        }
        layer = next;
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Phase {
    Free,
    /// Must stay `left >= 1` more ticks.
    Busy {
        goal: bool,
        left: u32,
    },
    Done,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Joint {
    pos: Vec<VertexId>,
    phase: Vec<Phase>,
    targets_done: u64,
    goals_taken: u64,
}

struct Step {
    state: Joint,
    cost: u64,
    /// Agents whose goal task finished at the current tick (`true`) or the
    /// next one (`false`).
    finished: Vec<(AgentId, bool)>,
}

/// Joint time-expanded model: all agents move in lockstep, a task begins at
/// any tick its executor stands on it, and each tick costs one per agent
/// that has not finished its goal task.
struct JointModel<'a> {
    inst: &'a Instance,
    target_index: HashMap<VertexId, usize>,
    goal_index: HashMap<VertexId, usize>,
    goal_dist: Vec<Vec<u32>>,
}

#[derive(Clone, Copy)]
struct Choice {
    to: VertexId,
    phase: Phase,
    target_bit: u64,
    goal_bit: u64,
    pays: bool,
    /// Finished now (`Some(true)`) or on arrival at the next tick.
    finished: Option<bool>,
}

impl<'a> JointModel<'a> {
    fn new(inst: &'a Instance) -> Self {
        assert!(inst.targets.len() <= 64 && inst.goals.len() <= 64);
        Self {
            inst,
            target_index: inst.targets.iter().enumerate().map(|(k, &v)| (v, k)).collect(),
            goal_index: inst.goals.iter().enumerate().map(|(k, &v)| (v, k)).collect(),
            goal_dist: inst.goals.iter().map(|&g| bfs(inst, g)).collect(),
        }
    }

    fn initial(&self) -> Joint {
        let n = self.inst.num_agents();
        Joint { pos: self.inst.starts.clone(), phase: vec![Phase::Free; n], targets_done: 0, goals_taken: 0 }
    }

    fn is_final(&self, s: &Joint) -> bool {
        s.phase.iter().all(|p| *p == Phase::Done) && s.targets_done.count_ones() as usize == self.inst.targets.len()
    }

    fn to_goal(&self, a: AgentId, v: VertexId, taken: u64) -> u64 {
        let mut best = INF;
        for (k, &g) in self.inst.goals.iter().enumerate() {
            if taken & (1 << k) == 0 {
                if let Some(tau) = self.inst.duration(a, g) {
                    let d = self.goal_dist[k][v];
                    if d != u32::MAX {
                        best = best.min(d as u64 + tau as u64);
                    }
                }
            }
        }
        best
    }

    /// Admissible and consistent estimate of the remaining cost.
    fn h(&self, s: &Joint) -> u64 {
        let mut total = 0u64;
        for a in 0..s.pos.len() {
            let x = match s.phase[a] {
                Phase::Done => 0,
                Phase::Busy { goal: true, left } => left as u64,
                Phase::Busy { goal: false, left } => left as u64 + self.to_goal(a, s.pos[a], s.goals_taken),
                Phase::Free => self.to_goal(a, s.pos[a], s.goals_taken),
            };
            if x >= INF {
                return INF;
            }
            total += x;
        }
        total
    }

    /// Advances a staying agent by one tick.
    fn countdown(phase: Phase) -> (Phase, Option<bool>) {
        match phase {
            Phase::Busy { goal, left } if left > 1 => (Phase::Busy { goal, left: left - 1 }, None),
            Phase::Busy { goal: true, .. } => (Phase::Done, Some(false)),
            Phase::Busy { goal: false, .. } => (Phase::Free, None),
            p => (p, None),
        }
    }

    fn agent_options(&self, s: &Joint, a: AgentId) -> Vec<Choice> {
        let v = s.pos[a];
        let mut out = Vec::new();
        let stay = |phase: Phase, target_bit, goal_bit| {
            let (phase, finished) = Self::countdown(phase);
            Choice { to: v, phase, target_bit, goal_bit, pays: true, finished }
        };
        match s.phase[a] {
            Phase::Done => {
                out.push(Choice { to: v, phase: Phase::Done, target_bit: 0, goal_bit: 0, pays: false, finished: None })
            }
            Phase::Busy { .. } => out.push(stay(s.phase[a], 0, 0)),
            Phase::Free => {
                let walk = |out: &mut Vec<Choice>, target_bit| {
                    for w in moves(self.inst, v) {
                        out.push(Choice {
                            to: w,
                            phase: Phase::Free,
                            target_bit,
                            goal_bit: 0,
                            pays: true,
                            finished: None,
                        });
                    }
                };
                walk(&mut out, 0);
                if let Some(&k) = self.target_index.get(&v) {
                    if s.targets_done & (1 << k) == 0 {
                        if let Some(tau) = self.inst.duration(a, v) {
                            if tau == 0 {
                                walk(&mut out, 1 << k);
                            } else {
                                out.push(stay(Phase::Busy { goal: false, left: tau }, 1 << k, 0));
                            }
                        }
                    }
                }
                if let Some(&k) = self.goal_index.get(&v) {
                    if s.goals_taken & (1 << k) == 0 {
                        if let Some(tau) = self.inst.duration(a, v) {
                            if tau == 0 {
                                out.push(Choice {
                                    to: v,
                                    phase: Phase::Done,
                                    target_bit: 0,
                                    goal_bit: 1 << k,
                                    pays: false,
                                    finished: Some(true),
                                });
                            } else {
                                out.push(stay(Phase::Busy { goal: true, left: tau }, 0, 1 << k));
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn steps(&self, s: &Joint) -> Vec<Step> {
        let n = s.pos.len();
        let options: Vec<Vec<Choice>> = (0..n).map(|a| self.agent_options(s, a)).collect();
        let mut out = Vec::new();
        let mut chosen: Vec<Choice> = Vec::with_capacity(n);
        self.combine(s, &options, &mut chosen, &mut out);
        out
    }

    fn combine(&self, s: &Joint, options: &[Vec<Choice>], chosen: &mut Vec<Choice>, out: &mut Vec<Step>) {
        let a = chosen.len();
        if a == options.len() {
            let state = Joint {
                pos: chosen.iter().map(|o| o.to).collect(),
                phase: chosen.iter().map(|o| o.phase).collect(),
                targets_done: chosen.iter().fold(s.targets_done, |m, o| m | o.target_bit),
                goals_taken: chosen.iter().fold(s.goals_taken, |m, o| m | o.goal_bit),
            };
            let cost = chosen.iter().filter(|o| o.pays).count() as u64;
            let finished = chosen.iter().enumerate().filter_map(|(a, o)| o.finished.map(|f| (a, f))).collect();
            out.push(Step { state, cost, finished });
            return;
        }
        for &o in &options[a] {
            let clash = chosen
                .iter()
                .enumerate()
                .any(|(b, p)| p.to == o.to || (p.to == s.pos[a] && o.to == s.pos[b] && o.to != s.pos[a]));
            if clash {
                continue;
            }
            chosen.push(o);
            self.combine(s, options, chosen, out);
            chosen.pop();
        }
    }
}

/// Optimal sum of costs by A* over joint states. `limit` caps the number
/// of stored states; exceeding it panics.
pub fn joint_optimum(inst: &Instance, limit: usize) -> Option<u64> {
    let model = JointModel::new(inst);
    let start = model.initial();
    let mut states: Vec<Joint> = vec![start.clone()];
    let mut best: HashMap<Joint, u64> = HashMap::from([(start.clone(), 0)]);
    let mut heap = BinaryHeap::new();
    let h0 = model.h(&start);
    if h0 >= INF {
        return None;
    }
    heap.push(Reverse((h0, 0u64, 0usize)));
    while let Some(Reverse((_, g, id))) = heap.pop() {
        let s = states[id].clone();
        if best[&s] < g {
            continue;
        }
        if model.is_final(&s) {
            return Some(g);
        }
        for step in model.steps(&s) {
            let g2 = g + step.cost;
            if step.cost == 0 && !model.is_final(&step.state) {
                // Every agent finished: only the final state matters.
                continue;
            }
            let h = model.h(&step.state);
            if h >= INF {
                continue;
            }
            if best.get(&step.state).is_some_and(|&b| b <= g2) {
                continue;
            }
            best.insert(step.state.clone(), g2);
            states.push(step.state);
            assert!(states.len() <= limit, "joint search exceeded {limit} states");
            heap.push(Reverse((g2 + h, g2, states.len() - 1)));
        }
    }
    None
}

/// Calls `visit` with every conflict-free complete joint path of cost at
/// most `bound` (vertex per tick, each path ending when its goal task
/// finishes). Paths that differ only in where tasks are executed are
/// reported once per execution choice.
pub fn enumerate_solutions(inst: &Instance, bound: u64, visit: &mut dyn FnMut(&[Vec<VertexId>])) {
    let model = JointModel::new(inst);
    let start = model.initial();
    let n = inst.num_agents();
    let mut walk = Walk {
        model: &model,
        bound,
        hist: inst.starts.iter().map(|&s| vec![s]).collect(),
        finish: vec![None; n],
        dead: HashMap::new(),
        visit,
    };
    walk.dfs(&start, 0);
}

struct Walk<'a, 'v> {
    model: &'a JointModel<'a>,
    bound: u64,
    hist: Vec<Vec<VertexId>>,
    finish: Vec<Option<usize>>,
    /// Largest remaining budget with which a state yielded no solution.
    dead: HashMap<Joint, u64>,
    visit: &'v mut dyn FnMut(&[Vec<VertexId>]),
}

impl Walk<'_, '_> {
    /// Returns whether any solution was reported below `s`. Feasibility
    /// from a state depends only on the state and the remaining budget.
    fn dfs(&mut self, s: &Joint, g: u64) -> bool {
        if self.model.is_final(s) {
            let paths: Vec<Vec<VertexId>> =
                self.hist.iter().zip(&self.finish).map(|(h, f)| h[..=f.unwrap()].to_vec()).collect();
            (self.visit)(&paths);
            return true;
        }
        let left = self.bound - g;
        if self.dead.get(s).is_some_and(|&d| d >= left) {
            return false;
        }
        let t = self.hist[0].len() - 1;
        let mut found = false;
        for step in self.model.steps(s) {
            if step.cost == 0 && !self.model.is_final(&step.state) {
                continue;
            }
            let g2 = g + step.cost;
            let h = self.model.h(&step.state);
            if h >= INF || g2 + h > self.bound {
                continue;
            }
            for &(a, now) in &step.finished {
                self.finish[a] = Some(if now { t } else { t + 1 });
            }
            for (a, h) in self.hist.iter_mut().enumerate() {
                h.push(step.state.pos[a]);
            }
            found |= self.dfs(&step.state, g2);
            for h in self.hist.iter_mut() {
                h.pop();
            }
            for &(a, _) in &step.finished {
                self.finish[a] = None;
            }
        }
        if !found {
            let d = self.dead.entry(s.clone()).or_insert(0);
            *d = (*d).max(left);
        }
        found
    }
}

/// Whether a joint path (resting at the end) has no vertex or edge conflict.
pub fn conflict_free(paths: &[Vec<VertexId>]) -> bool {
    let at = |p: &Vec<VertexId>, t: usize| p[t.min(p.len() - 1)];
    let horizon = paths.iter().map(Vec::len).max().unwrap_or(1);
    for t in 0..horizon {
        for i in 0..paths.len() {
            for j in i + 1..paths.len() {
                if at(&paths[i], t) == at(&paths[j], t) {
                    return false;
                }
                let (a, b) = (at(&paths[i], t), at(&paths[i], t + 1));
                if a != b && at(&paths[j], t) == b && at(&paths[j], t + 1) == a {
                    return false;
                }
            }
        }
    }
    true
}

/// Whether `path` (resting at its end) breaks `c`.
pub fn breaks(path: &[VertexId], c: &Constraint) -> bool {
    let at = |t: usize| path[t.min(path.len() - 1)];
    match *c {
        Constraint::Vertex { vertex, tick, .. } => at(tick as usize) == vertex,
        Constraint::Edge { edge, tick, .. } => {
            let (a, b) = (at(tick as usize), at(tick as usize + 1));
            a != b && (a.min(b), a.max(b)) == edge
        }
    }
}

/// For every vertex, the order in which agents arrive there, as
/// (agent, index of the arrival within that agent's route).
pub fn arrival_order(paths: &[Vec<VertexId>]) -> BTreeMap<VertexId, Vec<(AgentId, usize)>> {
    let mut arrivals = Vec::new();
    for (a, p) in paths.iter().enumerate() {
        let mut k = 0;
        for t in 0..p.len() {
            if t == 0 || p[t] != p[t - 1] {
                arrivals.push((t, p[t], a, k));
                k += 1;
            }
        }
    }
    arrivals.sort();
    let mut out: BTreeMap<VertexId, Vec<(AgentId, usize)>> = BTreeMap::new();
    for (_, v, a, k) in arrivals {
        out.entry(v).or_default().push((a, k));
    }
    out
}
