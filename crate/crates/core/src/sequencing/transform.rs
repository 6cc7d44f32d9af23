use crate::error::{Error, Result};
use crate::sequencing::{is_complete, JointSequence, TargetGraph};
use crate::workspace::Instance;
use crate::{AgentId, VertexId};

const NO_ARC: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterKind {
    Start,
    Target,
    Goal,
}

/// A node of the transformed graph: an agent start, or one copy of a
/// task vertex. `agent` is the agent executing the task when the tour
/// enters the cluster at this copy; `None` in the anonymous construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TfNode {
    pub vertex: VertexId,
    pub agent: Option<AgentId>,
    pub cluster: usize,
}

#[derive(Debug, Clone)]
pub struct Cluster {
    pub vertex: VertexId,
    pub kind: ClusterKind,
    /// Member nodes in ring order (ascending agent).
    pub members: Vec<usize>,
}

/// Single-tour encoding of the assignment-constrained sequencing problem.
///
/// Every key vertex becomes a cluster. A task vertex `v` with eligible
/// agents `a_1 < … < a_k` becomes copies `v^{a_1} … v^{a_k}` joined by a
/// zero-cost ring. Entering `v` at `v^i` means agent `i` executes `v`; the
/// tour then walks the ring and leaves from the ring predecessor of `v^i`,
/// whose out-arcs only lead to copies owned by `i`. Every inter-cluster arc
/// costs `big_m` plus metric cost plus the duration of the entered copy, so
/// a tour that visits each cluster contiguously costs `offset() + mass`
/// with `mass < big_m`. Goal copies lead to the start of the next agent,
/// which makes starts appear in ascending order.
///
/// When every task vertex is eligible for all agents with one duration the
/// copies are redundant. The simplified construction keeps one node per
/// vertex and relies on the solver visiting starts in ascending order.
#[derive(Debug, Clone)]
pub struct TransformedGraph {
    nodes: Vec<TfNode>,
    clusters: Vec<Cluster>,
    ring_next: Vec<usize>,
    mass: Vec<u32>,
    big_m: u64,
    num_agents: usize,
    simplified: bool,
}

impl TransformedGraph {
    pub fn nodes(&self) -> &[TfNode] {
        &self.nodes
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    pub fn big_m(&self) -> u64 {
        self.big_m
    }

    pub fn is_simplified(&self) -> bool {
        self.simplified
    }

    /// Constant part of every cluster-contiguous tour.
    pub fn offset(&self) -> u64 {
        self.clusters.len() as u64 * self.big_m
    }

    pub fn ring_next(&self, u: usize) -> usize {
        self.ring_next[u]
    }

    /// Ring predecessor of `u`: the exit node when the cluster is entered at `u`.
    pub fn ring_exit(&self, u: usize) -> usize {
        let members = &self.clusters[self.nodes[u].cluster].members;
        let pos = members.iter().position(|&m| m == u).unwrap();
        members[(pos + members.len() - 1) % members.len()]
    }

    pub fn is_ring_arc(&self, u: usize, v: usize) -> bool {
        u != v && self.ring_next[u] == v
    }

    /// Inter-cluster arc cost without the big-M term.
    pub fn mass(&self, u: usize, v: usize) -> Option<u32> {
        let m = self.mass[u * self.nodes.len() + v];
        (m != NO_ARC).then_some(m)
    }

    /// Full arc cost, `None` for absent arcs.
    pub fn arc(&self, u: usize, v: usize) -> Option<u64> {
        if self.is_ring_arc(u, v) {
            return Some(0);
        }
        self.mass(u, v).map(|m| self.big_m + m as u64)
    }

    pub fn start_node(&self, agent: AgentId) -> usize {
        agent
    }

    /// Cost of a closed tour, `None` if it uses a missing arc.
    pub fn tour_cost(&self, tour: &[usize]) -> Option<u64> {
        if tour.is_empty() {
            return None;
        }
        let mut total = 0u64;
        for k in 0..tour.len() {
            total += self.arc(tour[k], tour[(k + 1) % tour.len()])?;
        }
        Some(total)
    }

    /// Splits a tour at the starts and keeps the first copy of each cluster.
    pub fn untransform(&self, tour: &[usize], tg: &TargetGraph, inst: &Instance) -> Result<JointSequence> {
        let bad = |msg: &str| Error::Sequencing(format!("inconsistent tour: {msg}"));
        if tour.len() != self.nodes.len() {
            return Err(bad("not Hamiltonian"));
        }
        let first = tour.iter().position(|&u| u == 0).ok_or_else(|| bad("missing first start"))?;
        let mut sequences: Vec<Vec<VertexId>> = vec![Vec::new(); self.num_agents];
        let mut current: Option<AgentId> = None;
        let mut prev_cluster = usize::MAX;
        let mut seen = vec![false; self.clusters.len()];
        for k in 0..tour.len() {
            let u = tour[(first + k) % tour.len()];
            let node = &self.nodes[u];
            let cluster = &self.clusters[node.cluster];
            if node.cluster != prev_cluster {
                if seen[node.cluster] {
                    return Err(bad("cluster visited twice"));
                }
                seen[node.cluster] = true;
                match cluster.kind {
                    ClusterKind::Start => {
                        current = Some(u);
                        sequences[u].push(node.vertex);
                    }
                    _ => {
                        let a = current.ok_or_else(|| bad("task before start"))?;
                        if node.agent.is_some_and(|q| q != a) {
                            return Err(bad("copy entered by wrong agent"));
                        }
                        if sequences[a].last().is_some_and(|&v| inst.is_goal(v)) {
                            return Err(bad("task after goal"));
                        }
                        sequences[a].push(node.vertex);
                    }
                }
            }
            prev_cluster = node.cluster;
        }
        if !is_complete(&sequences, inst) {
            return Err(bad("not a complete joint sequence"));
        }
        let seq = JointSequence::priced(sequences, tg, inst).ok_or_else(|| bad("ineligible assignment"))?;
        if let Some(c) = self.tour_cost(tour) {
            if c != self.offset() + seq.cost {
                return Err(bad("tour cost does not match sequence cost"));
            }
        }
        Ok(seq)
    }
}

/// Builds the transformed graph. `simplify` selects the single-copy
/// construction when the instance allows it.
pub fn transform(inst: &Instance, tg: &TargetGraph, simplify: bool) -> Result<TransformedGraph> {
    let n = inst.num_agents();
    let simplified = simplify && inst.is_anonymous();
    let mut nodes = Vec::new();
    let mut clusters = Vec::new();
    for (a, &s) in inst.starts.iter().enumerate() {
        nodes.push(TfNode { vertex: s, agent: Some(a), cluster: a });
        clusters.push(Cluster { vertex: s, kind: ClusterKind::Start, members: vec![a] });
    }
    let tasks = inst
        .targets
        .iter()
        .map(|&v| (v, ClusterKind::Target))
        .chain(inst.goals.iter().map(|&v| (v, ClusterKind::Goal)));
    for (v, kind) in tasks {
        let c = clusters.len();
        let agents: Vec<Option<AgentId>> = if simplified { vec![None] } else { inst.eligible(v).map(Some).collect() };
        if agents.is_empty() {
            return Err(Error::Instance(format!("vertex {v} has no eligible agent")));
        }
        let mut members = Vec::new();
        for agent in agents {
            members.push(nodes.len());
            nodes.push(TfNode { vertex: v, agent, cluster: c });
        }
        clusters.push(Cluster { vertex: v, kind, members });
    }

    let total = nodes.len();
    let mut ring_next = vec![0; total];
    for c in &clusters {
        for (k, &m) in c.members.iter().enumerate() {
            ring_next[m] = c.members[(k + 1) % c.members.len()];
        }
    }

    let mut big_m: u64 = 1;
    for i in 0..tg.len() {
        for j in 0..tg.len() {
            big_m = big_m.checked_add(tg.cost_idx(i, j) as u64).ok_or(Error::BigMOverflow)?;
        }
    }
    for v in inst.task_vertices() {
        for a in inst.eligible(v) {
            big_m = big_m.checked_add(inst.duration(a, v).unwrap_or(0) as u64).ok_or(Error::BigMOverflow)?;
        }
    }
    // Tours and external encodings must fit comfortably in i64.
    let limit = (i64::MAX as u64) / 8;
    let span = (clusters.len() as u64 + 2).checked_mul(big_m).ok_or(Error::BigMOverflow)?;
    if span.checked_mul(clusters.len() as u64 + 2).is_none_or(|x| x > limit) || big_m >= NO_ARC as u64 {
        return Err(Error::BigMOverflow);
    }

    // Agent that leaves node `u`: the start's owner, or the agent of the
    // ring successor for a copy.
    let leaving = |u: usize| -> Option<AgentId> { nodes[ring_next[u]].agent };
    let mut mass = vec![NO_ARC; total * total];
    for u in 0..total {
        let cu = &clusters[nodes[u].cluster];
        for w in 0..total {
            let cw = &clusters[nodes[w].cluster];
            if nodes[u].cluster == nodes[w].cluster {
                continue;
            }
            let m = match (cu.kind, cw.kind) {
                (ClusterKind::Start | ClusterKind::Target, ClusterKind::Target | ClusterKind::Goal) => {
                    let agent = if simplified {
                        if cu.kind == ClusterKind::Start {
                            u
                        } else {
                            0
                        }
                    } else {
                        let a = leaving(u).unwrap();
                        if nodes[w].agent != Some(a) {
                            continue;
                        }
                        a
                    };
                    let tau = inst.duration(agent, cw.vertex).ok_or_else(|| {
                        Error::Instance(format!("missing duration for agent {agent} at {}", cw.vertex))
                    })?;
                    tg.cost(cu.vertex, cw.vertex) + tau
                }
                (ClusterKind::Goal, ClusterKind::Start) => {
                    if !simplified {
                        let a = leaving(u).unwrap();
                        if w != (a + 1) % n {
                            continue;
                        }
                    }
                    0
                }
                _ => continue,
            };
            mass[u * total + w] = m;
        }
    }
    Ok(TransformedGraph { nodes, clusters, ring_next, mass, big_m, num_agents: n, simplified })
}

/// Tour of the transformed graph that realises a given joint sequence.
/// Inverse of [`TransformedGraph::untransform`].
pub fn encode_sequence(g: &TransformedGraph, sequences: &[Vec<VertexId>]) -> Option<Vec<usize>> {
    let mut tour = Vec::with_capacity(g.num_nodes());
    for (a, seq) in sequences.iter().enumerate() {
        tour.push(g.start_node(a));
        for &v in &seq[1..] {
            let c = g.clusters().iter().position(|c| c.vertex == v && c.kind != ClusterKind::Start)?;
            let members = &g.clusters()[c].members;
            let entry = *members.iter().find(|&&m| g.nodes()[m].agent.is_none_or(|q| q == a))?;
            let mut u = entry;
            loop {
                tour.push(u);
                u = g.ring_next(u);
                if u == entry {
                    break;
                }
            }
        }
    }
    (tour.len() == g.num_nodes()).then_some(tour)
}
