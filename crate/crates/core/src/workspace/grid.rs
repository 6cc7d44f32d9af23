use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::VertexId;

/// Distance value for cells that BFS cannot reach.
pub const UNREACHABLE: u32 = u32::MAX;

/// A 4-connected occupancy grid. Cells are numbered row-major:
/// `id = width * row + col`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    width: usize,
    height: usize,
    passable: Vec<bool>,
}

impl Grid {
    pub fn new(width: usize, height: usize, passable: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Instance("grid dimensions must be positive".into()));
        }
        if passable.len() != width * height {
            return Err(Error::Instance(format!("grid has {} cells, expected {}x{}", passable.len(), width, height)));
        }
        if !passable.iter().any(|&p| p) {
            return Err(Error::Instance("grid has no passable cell".into()));
        }
        Ok(Self { width, height, passable })
    }

    /// An obstacle-free grid.
    pub fn open(width: usize, height: usize) -> Self {
        Self::new(width, height, vec![true; width * height]).expect("non-empty grid")
    }

    pub fn with_blocked(width: usize, height: usize, blocked: &[VertexId]) -> Result<Self> {
        let mut passable = vec![true; width * height];
        for &b in blocked {
            if b >= passable.len() {
                return Err(Error::Instance(format!("blocked cell {b} outside the grid")));
            }
            passable[b] = false;
        }
        Self::new(width, height, passable)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn num_cells(&self) -> usize {
        self.passable.len()
    }

    pub fn passable_count(&self) -> usize {
        self.passable.iter().filter(|&&p| p).count()
    }

    pub fn is_passable(&self, v: VertexId) -> bool {
        self.passable.get(v).copied().unwrap_or(false)
    }

    pub fn blocked(&self) -> Vec<VertexId> {
        (0..self.num_cells()).filter(|&v| !self.passable[v]).collect()
    }

    pub fn vertex(&self, row: usize, col: usize) -> VertexId {
        debug_assert!(row < self.height && col < self.width);
        self.width * row + col
    }

    pub fn coords(&self, v: VertexId) -> (usize, usize) {
        (v / self.width, v % self.width)
    }

    /// Passable 4-neighbours of `v`.
    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        let (row, col) = self.coords(v);
        let up = (row > 0).then(|| v - self.width);
        let down = (row + 1 < self.height).then(|| v + self.width);
        let left = (col > 0).then(|| v - 1);
        let right = (col + 1 < self.width).then(|| v + 1);
        [up, left, right, down].into_iter().flatten().filter(move |&n| self.passable[n])
    }
}

/// The workspace graph induced by a grid. Blocked cells keep their id but
/// have no neighbours. Every edge costs one tick.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<VertexId>>,
}

impl Graph {
    pub fn from_grid(grid: &Grid) -> Self {
        let adjacency = (0..grid.num_cells())
            .map(|v| {
                if grid.is_passable(v) {
                    let mut n: Vec<_> = grid.neighbors(v).collect();
                    n.sort_unstable();
                    n
                } else {
                    Vec::new()
                }
            })
            .collect();
        Self { adjacency }
    }

    pub fn num_vertices(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adjacency[v]
    }

    pub fn adjacent(&self, u: VertexId, v: VertexId) -> bool {
        self.adjacency.get(u).is_some_and(|n| n.binary_search(&v).is_ok())
    }

    /// Unit-cost single-source distances; `UNREACHABLE` marks cells not
    /// connected to `source`.
    pub fn bfs(&self, source: VertexId) -> Vec<u32> {
        let mut dist = vec![UNREACHABLE; self.adjacency.len()];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let d = dist[u] + 1;
            for &w in &self.adjacency[u] {
                if dist[w] == UNREACHABLE {
                    dist[w] = d;
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}
