//! Rectangular grid topologies and their extension by cross-row edges that
//! become reachable through one-dimensional row displacements.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeKind {
    /// Same row, adjacent columns.
    Horizontal,
    /// Adjacent rows, same column.
    Vertical,
    /// Adjacent rows, different columns. Only usable after a displacement.
    CrossRow,
}

/// An undirected edge stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge(pub usize, pub usize);

impl Edge {
    pub fn new(a: usize, b: usize) -> Self {
        if a < b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn contains(&self, p: usize) -> bool {
        self.0 == p || self.1 == p
    }

    /// The other endpoint. Panics if `p` is not on the edge.
    pub fn partner(&self, p: usize) -> usize {
        if self.0 == p {
            self.1
        } else {
            assert_eq!(self.1, p, "site {p} not on edge {self:?}");
            self.0
        }
    }
}

/// A `rows x cols` grid of physical qubits numbered row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridTopology {
    rows: usize,
    cols: usize,
    base_edges: Vec<Edge>,
    ext_edges: Vec<Edge>,
    index: HashMap<Edge, usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
}

impl GridTopology {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn num_sites(&self) -> usize {
        self.rows * self.cols
    }

    pub fn row(&self, p: usize) -> usize {
        p / self.cols
    }

    pub fn col(&self, p: usize) -> usize {
        p % self.cols
    }

    pub fn site(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    pub fn base_edges(&self) -> &[Edge] {
        &self.base_edges
    }

    /// Edges usable under some valid displacement; equal to the base edges
    /// until [`extend_topology`] is applied.
    pub fn ext_edges(&self) -> &[Edge] {
        &self.ext_edges
    }

    /// Position of `edge` in [`ext_edges`](Self::ext_edges).
    pub fn edge_index(&self, edge: Edge) -> Option<usize> {
        self.index.get(&edge).copied()
    }

    pub fn edge_kind(&self, edge: Edge) -> EdgeKind {
        let Edge(a, b) = edge;
        if self.row(a) == self.row(b) {
            EdgeKind::Horizontal
        } else if self.col(a) == self.col(b) {
            EdgeKind::Vertical
        } else {
            EdgeKind::CrossRow
        }
    }

    pub fn is_base_edge(&self, edge: Edge) -> bool {
        self.base_edges.binary_search(&edge).is_ok()
    }

    /// Extended edges incident to `p`.
    pub fn incident(&self, p: usize) -> impl Iterator<Item = (usize, Edge)> + '_ {
        self.ext_edges
            .iter()
            .copied()
            .enumerate()
            .filter(move |(_, e)| e.contains(p))
    }

    /// Sites of one row in column order.
    pub fn row_sites(&self, row: usize) -> std::ops::Range<usize> {
        row * self.cols..(row + 1) * self.cols
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            rows: self.rows,
            cols: self.cols,
        }
    }

    fn with_edges(rows: usize, cols: usize, base: Vec<Edge>, mut ext: Vec<Edge>) -> Self {
        ext.sort_unstable();
        ext.dedup();
        let index = ext.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        Self {
            rows,
            cols,
            base_edges: base,
            ext_edges: ext,
            index,
        }
    }
}

/// Nearest-neighbour grid with horizontal and vertical edges.
pub fn build_grid(rows: usize, cols: usize) -> Result<GridTopology> {
    if rows == 0 || cols == 0 {
        return Err(Error::Argument(format!(
            "grid dimensions must be positive, got {rows}x{cols}"
        )));
    }
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let p = r * cols + c;
            if c + 1 < cols {
                edges.push(Edge(p, p + 1));
            }
            if r + 1 < rows {
                edges.push(Edge(p, p + cols));
            }
        }
    }
    edges.sort_unstable();
    Ok(GridTopology::with_edges(rows, cols, edges.clone(), edges))
}

/// Adds every pair of qubits in neighbouring rows. Same-row connectivity is
/// unchanged. Idempotent.
pub fn extend_topology(g: &GridTopology) -> GridTopology {
    let mut ext = g.base_edges.clone();
    for r in 0..g.rows.saturating_sub(1) {
        for a in g.row_sites(r) {
            for b in g.row_sites(r + 1) {
                ext.push(Edge(a, b));
            }
        }
    }
    GridTopology::with_edges(g.rows, g.cols, g.base_edges.clone(), ext)
}

/// Smallest grid holding `q_count` qubits: minimal `rows * cols`, then
/// squarest, then wider than tall. Returns `(rows, cols)`.
pub fn grid_for_circuit(q_count: usize) -> (usize, usize) {
    let q = q_count.max(1);
    (1..=q)
        .map(|rows| (rows, q.div_ceil(rows)))
        .filter(|&(rows, cols)| cols >= rows)
        .min_by_key(|&(rows, cols)| (rows * cols, cols - rows))
        .expect("the 1 x q grid always qualifies")
}
