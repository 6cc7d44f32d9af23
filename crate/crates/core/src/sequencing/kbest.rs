use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::Result;
use crate::sequencing::{ArcSet, JointSequence, SequencingBackend, TargetGraph, Tour, TransformedGraph};
use crate::workspace::Instance;
use crate::VertexId;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct PoolEntry {
    tour: Tour,
    arcs: ArcSetKey,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct ArcSetKey {
    include: Vec<(usize, usize)>,
    exclude: Vec<(usize, usize)>,
}

impl From<&ArcSetKey> for ArcSet {
    fn from(k: &ArcSetKey) -> Self {
        ArcSet { include: k.include.clone(), exclude: k.exclude.clone() }
    }
}

/// Enumerates joint sequences in non-decreasing cost by the partition
/// method over the transformed graph.
pub struct KBest {
    inst: Arc<Instance>,
    tg: Arc<TargetGraph>,
    graph: Arc<TransformedGraph>,
    backend: Arc<dyn SequencingBackend>,
    pool: BTreeSet<PoolEntry>,
    emitted: HashSet<Vec<Vec<VertexId>>>,
    count: usize,
    calls: usize,
    deadline: Option<Instant>,
}

impl KBest {
    /// Solves the unconstrained problem and seeds the pool.
    pub fn new(
        inst: Arc<Instance>,
        tg: Arc<TargetGraph>,
        graph: Arc<TransformedGraph>,
        backend: Arc<dyn SequencingBackend>,
        deadline: Option<Instant>,
    ) -> Result<Self> {
        let mut kb = Self {
            inst,
            tg,
            graph,
            backend,
            pool: BTreeSet::new(),
            emitted: HashSet::new(),
            count: 0,
            calls: 1,
            deadline,
        };
        let root = ArcSetKey { include: vec![], exclude: vec![] };
        if let Some(tour) = kb.backend.solve(&kb.graph, &ArcSet::from(&root), deadline)? {
            kb.pool.insert(PoolEntry { tour, arcs: root });
        }
        Ok(kb)
    }

    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
    }

    /// Cost of the sequence the next call to [`KBest::next`] will emit.
    pub fn peek_cost(&self) -> Option<u64> {
        self.pool.first().map(|e| e.tour.cost - self.graph.offset())
    }

    /// Number of sequences emitted so far.
    pub fn emitted(&self) -> usize {
        self.count
    }

    /// Number of sequencing subproblems solved so far.
    pub fn sequencing_calls(&self) -> usize {
        self.calls
    }

    /// Emits the next-best joint sequence, or `None` when exhausted.
    pub fn next(&mut self) -> Result<Option<JointSequence>> {
        while let Some(entry) = self.pool.pop_first() {
            self.partition(&entry)?;
            let seq = self.graph.untransform(&entry.tour.nodes, &self.tg, &self.inst)?;
            if self.emitted.insert(seq.sequences.clone()) {
                self.count += 1;
                return Ok(Some(seq));
            }
        }
        Ok(None)
    }

    fn partition(&mut self, entry: &PoolEntry) -> Result<()> {
        let t = &entry.tour.nodes;
        let arcs: Vec<(usize, usize)> = (0..t.len()).map(|k| (t[k], t[(k + 1) % t.len()])).collect();
        let mut children = Vec::new();
        let mut include = entry.arcs.include.clone();
        for &e in &arcs {
            if !entry.arcs.include.contains(&e) {
                let mut exclude = entry.arcs.exclude.clone();
                exclude.push(e);
                children.push(ArcSetKey { include: include.clone(), exclude });
            }
            if !include.contains(&e) {
                include.push(e);
            }
        }
        self.calls += children.len();
        let graph = &self.graph;
        let backend = &self.backend;
        let deadline = self.deadline;
        let solved: Vec<Result<Option<Tour>>> =
            children.par_iter().map(|k| backend.solve(graph, &ArcSet::from(k), deadline)).collect();
        for (arcs, r) in children.into_iter().zip(solved) {
            if let Some(tour) = r? {
                self.pool.insert(PoolEntry { tour, arcs });
            }
        }
        Ok(())
    }
}
