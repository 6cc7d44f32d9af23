use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::cbss::detect_conflict;
use crate::error::{Error, Result};
use crate::lowlevel::Path;
use crate::workspace::Instance;
use crate::{AgentId, Duration, Tick, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeType {
    /// Consecutive events of one agent.
    Route,
    /// Same location, different agents, in original visiting order.
    Precedence,
}

/// One stay of an agent at a location in the source plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub agent: AgentId,
    /// Position in the agent's route.
    pub index: usize,
    pub location: VertexId,
    /// Arrival tick in the source plan.
    pub tick: Tick,
    /// Ticks spent waiting here in the source plan, beyond its task.
    pub wait: u32,
    /// Duration of the task executed here, if any.
    pub task: Option<Duration>,
    /// Initial dwell value: wait plus task duration.
    pub d: u32,
}

#[derive(Debug, Clone)]
pub struct TemporalPlanGraph {
    events: Vec<Event>,
    routes: Vec<Vec<usize>>,
    edges: Vec<(usize, usize, EdgeType)>,
    in_edges: Vec<Vec<usize>>,
}

impl TemporalPlanGraph {
    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Event ids of one agent, in route order.
    pub fn route(&self, agent: AgentId) -> &[usize] {
        &self.routes[agent]
    }

    pub fn num_agents(&self) -> usize {
        self.routes.len()
    }

    pub fn edges(&self) -> &[(usize, usize, EdgeType)] {
        &self.edges
    }

    /// Predecessor events of `e`.
    pub fn in_edges(&self, e: usize) -> &[usize] {
        &self.in_edges[e]
    }

    pub fn is_acyclic(&self) -> bool {
        let n = self.events.len();
        let mut indeg: Vec<usize> = self.in_edges.iter().map(Vec::len).collect();
        let mut out = vec![Vec::new(); n];
        for &(a, b, _) in &self.edges {
            out[a].push(b);
        }
        let mut stack: Vec<usize> = (0..n).filter(|&e| indeg[e] == 0).collect();
        let mut seen = 0;
        while let Some(e) = stack.pop() {
            seen += 1;
            for &b in &out[e] {
                indeg[b] -= 1;
                if indeg[b] == 0 {
                    stack.push(b);
                }
            }
        }
        seen == n
    }

    /// Graphviz rendering: events labelled `s_t^i`, with location and D.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph tpg {\n  rankdir=LR;\n");
        for (id, e) in self.events.iter().enumerate() {
            let _ = writeln!(out, "  e{id} [label=\"s_{}^{}\\nv={} D={}\"];", e.tick, e.agent, e.location, e.d);
        }
        for &(a, b, kind) in &self.edges {
            let style = match kind {
                EdgeType::Route => "solid",
                EdgeType::Precedence => "dashed",
            };
            let _ = writeln!(out, "  e{a} -> e{b} [style={style}];");
        }
        out.push_str("}\n");
        out
    }
}

/// Builds the temporal plan graph of a conflict-free plan.
///
/// Tasks are read from the plan's windows and priced with the durations of
/// `inst`; a window of planned length `k` at a stay of `s` ticks leaves a
/// wait of `s - 1 - k`.
pub fn build_tpg(inst: &Instance, paths: &[Path]) -> Result<TemporalPlanGraph> {
    if let Some(c) = detect_conflict(paths) {
        return Err(Error::Tpg(format!("plan is not conflict-free: {c:?}")));
    }
    let mut events = Vec::new();
    let mut routes = Vec::with_capacity(paths.len());
    for (agent, p) in paths.iter().enumerate() {
        let mut route = Vec::new();
        let mut t = 0usize;
        while t < p.vertices.len() {
            let v = p.vertices[t];
            let mut end = t;
            while end + 1 < p.vertices.len() && p.vertices[end + 1] == v {
                end += 1;
            }
            let stay = (end - t + 1) as u32;
            let window = p.tasks.iter().find(|w| w.vertex == v && w.start as usize >= t && w.start as usize <= end);
            let (wait, task) = match window {
                Some(w) => {
                    let tau = inst
                        .duration(agent, v)
                        .ok_or_else(|| Error::Tpg(format!("agent {agent} executes at {v} without eligibility")))?;
                    let planned = w.end - w.start;
                    (stay.saturating_sub(1 + planned), Some(tau))
                }
                None => (stay - 1, None),
            };
            route.push(events.len());
            events.push(Event {
                agent,
                index: route.len() - 1,
                location: v,
                tick: t as Tick,
                wait,
                task,
                d: wait + task.unwrap_or(0),
            });
            t = end + 1;
        }
        routes.push(route);
    }

    let mut edges = Vec::new();
    for route in &routes {
        for w in route.windows(2) {
            edges.push((w[0], w[1], EdgeType::Route));
        }
    }
    let mut by_location: BTreeMap<VertexId, Vec<usize>> = BTreeMap::new();
    for (id, e) in events.iter().enumerate() {
        by_location.entry(e.location).or_default().push(id);
    }
    for list in by_location.values_mut() {
        list.sort_by_key(|&id| events[id].tick);
        for (k, &a) in list.iter().enumerate() {
            for &b in &list[k + 1..] {
                if events[a].agent != events[b].agent {
                    edges.push((a, b, EdgeType::Precedence));
                }
            }
        }
    }
    let mut in_edges = vec![Vec::new(); events.len()];
    for &(a, b, _) in &edges {
        in_edges[b].push(a);
    }
    Ok(TemporalPlanGraph { events, routes, edges, in_edges })
}

/// Collapses consecutive duplicates.
pub fn route_of(vertices: &[VertexId]) -> Vec<VertexId> {
    let mut r: Vec<VertexId> = Vec::new();
    for &v in vertices {
        if r.last() != Some(&v) {
            r.push(v);
        }
    }
    r
}

/// Whether two joint paths visit locations in the same order: equal
/// per-agent routes, and at every location the same sequence of
/// (agent, route position) visits.
pub fn same_visiting_order(a: &[Vec<VertexId>], b: &[Vec<VertexId>]) -> bool {
    fn visits(paths: &[Vec<VertexId>]) -> BTreeMap<VertexId, Vec<(usize, usize)>> {
        let mut arrivals: Vec<(usize, VertexId, usize, usize)> = Vec::new();
        for (agent, p) in paths.iter().enumerate() {
            let mut pos = 0;
            for (t, &v) in p.iter().enumerate() {
                if t == 0 || p[t - 1] != v {
                    arrivals.push((t, v, agent, pos));
                    pos += 1;
                }
            }
        }
        arrivals.sort();
        let mut out: BTreeMap<VertexId, Vec<(usize, usize)>> = BTreeMap::new();
        for (_, v, agent, pos) in arrivals {
            out.entry(v).or_default().push((agent, pos));
        }
        out
    }
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| route_of(x) == route_of(y)) && visits(a) == visits(b)
}
