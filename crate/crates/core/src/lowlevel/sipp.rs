use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::lowlevel::{ConstraintSet, Path, SafeIntervalTable, TaskWindow};
use crate::workspace::{Instance, UNREACHABLE};
use crate::{AgentId, Tick, VertexId};

/// Shortest-path distances from every task vertex, shared by all searches.
#[derive(Debug, Clone)]
pub struct Distances {
    from: HashMap<VertexId, Vec<u32>>,
}

impl Distances {
    pub fn new(inst: &Instance) -> Self {
        let from = inst.task_vertices().map(|v| (v, inst.graph().bfs(v))).collect();
        Self { from }
    }

    pub fn get(&self, from: VertexId, to: VertexId) -> u32 {
        self.from[&from][to]
    }
}

#[derive(Debug, Clone, Copy)]
enum Step {
    Start,
    Move,
    Execute,
}

#[derive(Debug, Clone, Copy)]
struct Node {
    v: VertexId,
    interval: usize,
    progress: usize,
    t: Tick,
    parent: usize,
    step: Step,
}

/// Minimum-time path for `agent` that starts at `seq[0]` and executes the
/// tasks `seq[1..]` in order, the last being its goal, under `cs`.
///
/// A single A* over (vertex, safe interval, progress). A task is executed
/// on arrival when the whole window fits in the current safe interval; the
/// goal requires the final, unbounded interval. Non-assigned task vertices
/// are ordinary cells. `None` when no path exists.
pub fn plan_agent_path(
    inst: &Instance,
    dist: &Distances,
    agent: AgentId,
    seq: &[VertexId],
    cs: &ConstraintSet,
) -> Option<Path> {
    let tasks = &seq[1..];
    let taus: Vec<Tick> = tasks.iter().map(|&v| inst.duration(agent, v)).collect::<Option<_>>()?;
    // Remaining cost after finishing the travel to tasks[p].
    let mut rest = vec![0u64; tasks.len() + 1];
    for p in (0..tasks.len()).rev() {
        let leg = if p + 1 < tasks.len() { dist.get(tasks[p], tasks[p + 1]) as u64 } else { 0 };
        if leg == UNREACHABLE as u64 {
            return None;
        }
        rest[p] = rest[p + 1] + taus[p] as u64 + leg;
    }
    let h = |v: VertexId, p: usize| -> u64 {
        if p == tasks.len() {
            0
        } else {
            dist.get(tasks[p], v) as u64 + rest[p]
        }
    };

    let table = SafeIntervalTable::build(cs, Tick::MAX);
    let start = seq[0];
    let start_itv = table.interval_at(start, 0)?;
    let mut nodes = vec![Node { v: start, interval: start_itv, progress: 0, t: 0, parent: 0, step: Step::Start }];
    let mut best: HashMap<(VertexId, usize, usize), Tick> = HashMap::new();
    best.insert((start, start_itv, 0), 0);
    let mut open = BinaryHeap::new();
    open.push(Reverse((h(start, 0), Reverse(0usize), 0usize)));
    let graph = inst.graph();

    while let Some(Reverse((_, _, id))) = open.pop() {
        let node = nodes[id];
        if best.get(&(node.v, node.interval, node.progress)).is_some_and(|&t| t < node.t) {
            continue;
        }
        if node.progress == tasks.len() {
            return Some(reconstruct(&nodes, id, tasks, &taus));
        }
        let (_, itv_end) = table.intervals(node.v)[node.interval];
        let mut push = |n: Node, nodes: &mut Vec<Node>| {
            let key = (n.v, n.interval, n.progress);
            if best.get(&key).is_some_and(|&t| t <= n.t) {
                return;
            }
            best.insert(key, n.t);
            let f = n.t as u64 + h(n.v, n.progress);
            nodes.push(n);
            open.push(Reverse((f, Reverse(n.progress), nodes.len() - 1)));
        };

        // Execute the next task here.
        if tasks[node.progress] == node.v {
            let p = node.progress;
            let end = node.t as u64 + taus[p] as u64;
            let last = p + 1 == tasks.len();
            let fits = if last { itv_end == Tick::MAX } else { end <= itv_end as u64 };
            if fits && end < Tick::MAX as u64 {
                let n = Node {
                    v: node.v,
                    interval: node.interval,
                    progress: p + 1,
                    t: end as Tick,
                    parent: id,
                    step: Step::Execute,
                };
                push(n, &mut nodes);
            }
        }

        // Move to a neighbour, possibly after waiting.
        for &w in graph.neighbors(node.v) {
            let list = table.intervals(w);
            let first = list.partition_point(|&(_, e)| (e as u64) < node.t as u64 + 1);
            for (j, &(s, e)) in list.iter().enumerate().skip(first) {
                if s as u64 > itv_end as u64 + 1 {
                    break;
                }
                let lo = (node.t as u64).max((s as u64).saturating_sub(1));
                let hi = (itv_end as u64).min((e as u64).saturating_sub(1));
                let mut d = lo;
                while d <= hi && cs.forbids_edge(node.v, w, d as Tick) {
                    d += 1;
                }
                if d <= hi && d + 1 < Tick::MAX as u64 {
                    let n = Node {
                        v: w,
                        interval: j,
                        progress: node.progress,
                        t: (d + 1) as Tick,
                        parent: id,
                        step: Step::Move,
                    };
                    push(n, &mut nodes);
                }
            }
        }
    }
    None
}

fn reconstruct(nodes: &[Node], last: usize, tasks: &[VertexId], taus: &[Tick]) -> Path {
    let mut chain = vec![last];
    let mut id = last;
    while !matches!(nodes[id].step, Step::Start) {
        id = nodes[id].parent;
        chain.push(id);
    }
    chain.reverse();
    let mut vertices = vec![nodes[chain[0]].v];
    let mut windows = Vec::with_capacity(tasks.len());
    for pair in chain.windows(2) {
        let (prev, cur) = (nodes[pair[0]], nodes[pair[1]]);
        while (vertices.len() as Tick) < cur.t {
            vertices.push(prev.v);
        }
        match cur.step {
            Step::Move => vertices.push(cur.v),
            Step::Execute => windows.push(TaskWindow { vertex: cur.v, start: cur.t - taus[prev.progress], end: cur.t }),
            Step::Start => unreachable!(),
        }
    }
    debug_assert_eq!(windows.len(), tasks.len());
    Path { vertices, tasks: windows }
}
