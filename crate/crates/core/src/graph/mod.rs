//! Sparse graph storage, symmetric degree normalizations and the dense
//! feature/label containers used throughout the crate.

mod diagnostics;
mod ops;

pub use diagnostics::{dirichlet_energy, homophily_ratio};
pub use ops::{
    aggregate, propagate, propagate_with, row_normalize, spmm, spmm_with, Aggregator,
    DEFAULT_EPS_NORM,
};
pub(crate) use ops::{row_normalize_array, spmm_array};

use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::error::{AmlpError, Result};

/// Undirected, self-loop-free adjacency in compressed row form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseGraph {
    n_nodes: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
}

impl SparseGraph {
    /// Builds a graph from an undirected edge list. Each pair is inserted in
    /// both directions, duplicates are merged and self-loops dropped.
    pub fn from_edges(edges: &[(usize, usize)], n_nodes: usize) -> Result<Self> {
        let mut directed = Vec::with_capacity(edges.len() * 2);
        for (index, &(u, v)) in edges.iter().enumerate() {
            if u >= n_nodes || v >= n_nodes {
                return Err(AmlpError::EdgeOutOfRange {
                    index,
                    u,
                    v,
                    n_nodes,
                });
            }
            if u != v {
                directed.push((u, v));
                directed.push((v, u));
            }
        }
        directed.sort_unstable();
        directed.dedup();
        Ok(Self::from_sorted_directed(&directed, n_nodes))
    }

    /// `pairs` must be sorted, deduplicated, symmetric and free of self-loops.
    pub(crate) fn from_sorted_directed(pairs: &[(usize, usize)], n_nodes: usize) -> Self {
        let mut row_offsets = vec![0usize; n_nodes + 1];
        for &(u, _) in pairs {
            row_offsets[u + 1] += 1;
        }
        for i in 0..n_nodes {
            row_offsets[i + 1] += row_offsets[i];
        }
        let col_indices = pairs.iter().map(|&(_, v)| v).collect();
        SparseGraph {
            n_nodes,
            row_offsets,
            col_indices,
        }
    }

    pub fn empty(n_nodes: usize) -> Self {
        SparseGraph {
            n_nodes,
            row_offsets: vec![0; n_nodes + 1],
            col_indices: Vec::new(),
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Number of undirected edges.
    pub fn n_edges(&self) -> usize {
        self.col_indices.len() / 2
    }

    pub fn degree(&self, node: usize) -> usize {
        self.row_offsets[node + 1] - self.row_offsets[node]
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.col_indices[self.row_offsets[node]..self.row_offsets[node + 1]]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n_nodes && self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_nodes).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&&v| v > u)
                .map(move |&v| (u, v))
        })
    }

    /// Dense 0/1 adjacency. Intended for small graphs and tests.
    pub fn to_dense(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.n_nodes, self.n_nodes));
        for u in 0..self.n_nodes {
            for &v in self.neighbors(u) {
                a[[u, v]] = 1.0;
            }
        }
        a
    }

    /// Checks the structural invariants. Used by tests and after loading.
    pub fn validate(&self) -> Result<()> {
        if self.row_offsets.len() != self.n_nodes + 1 {
            return Err(AmlpError::invalid("row_offsets length"));
        }
        for u in 0..self.n_nodes {
            let row = self.neighbors(u);
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(AmlpError::invalid(format!("row {u} not strictly increasing")));
            }
            for &v in row {
                if v >= self.n_nodes {
                    return Err(AmlpError::invalid(format!("column {v} out of range")));
                }
                if v == u {
                    return Err(AmlpError::invalid(format!("self-loop at {u}")));
                }
                if !self.has_edge(v, u) {
                    return Err(AmlpError::invalid(format!("({u}, {v}) has no mirror")));
                }
            }
        }
        Ok(())
    }
}

/// Symmetric sparse matrix with real weights in compressed row form.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// The structure of `g` with every stored weight equal to one.
    pub fn unit(g: &SparseGraph) -> Self {
        CsrMatrix {
            n: g.n_nodes,
            row_offsets: g.row_offsets.clone(),
            col_indices: g.col_indices.clone(),
            values: vec![1.0; g.col_indices.len()],
        }
    }

    /// `triples` must be sorted by (row, col), deduplicated and symmetric.
    pub(crate) fn from_sorted_triples(triples: &[(usize, usize, f64)], n: usize) -> Self {
        let mut row_offsets = vec![0usize; n + 1];
        for &(u, _, _) in triples {
            row_offsets[u + 1] += 1;
        }
        for i in 0..n {
            row_offsets[i + 1] += row_offsets[i];
        }
        CsrMatrix {
            n,
            row_offsets,
            col_indices: triples.iter().map(|t| t.1).collect(),
            values: triples.iter().map(|t| t.2).collect(),
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[span.clone()], &self.values[span])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map(|p| vals[p]).unwrap_or(0.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Off-diagonal entries with weight `>= min_weight`, as a graph.
    pub fn threshold(&self, min_weight: f64) -> SparseGraph {
        let mut pairs = Vec::new();
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &w) in cols.iter().zip(vals) {
                if j != i && w >= min_weight {
                    pairs.push((i, j));
                }
            }
        }
        SparseGraph::from_sorted_directed(&pairs, self.n)
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.n, self.n));
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &w) in cols.iter().zip(vals) {
                a[[i, j]] = w;
            }
        }
        a
    }
}

/// A symmetrically degree-normalized adjacency: Ã (with self-loops) or S̃ (without).
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedAdjacency {
    matrix: CsrMatrix,
    self_loops: bool,
}

impl NormalizedAdjacency {
    pub fn n_nodes(&self) -> usize {
        self.matrix.n
    }

    pub fn self_loops(&self) -> bool {
        self.self_loops
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        self.matrix.row(i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }

    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    /// Squared Frobenius norm, accumulated in storage order.
    pub fn frobenius_sq(&self) -> f64 {
        self.matrix.values.iter().map(|v| v * v).sum()
    }

    pub fn to_dense(&self) -> Array2<f64> {
        self.matrix.to_dense()
    }
}

/// Ã = (D+I)^{-1/2} (A+I) (D+I)^{-1/2}.
pub fn normalize_with_self_loops(g: &SparseGraph) -> NormalizedAdjacency {
    let n = g.n_nodes;
    let inv_sqrt: Vec<f64> = (0..n).map(|i| 1.0 / ((g.degree(i) + 1) as f64).sqrt()).collect();
    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut col_indices = Vec::with_capacity(g.col_indices.len() + n);
    let mut values = Vec::with_capacity(g.col_indices.len() + n);
    row_offsets.push(0);
    for i in 0..n {
        let mut diag_done = false;
        for &j in g.neighbors(i) {
            if !diag_done && j > i {
                col_indices.push(i);
                values.push(inv_sqrt[i] * inv_sqrt[i]);
                diag_done = true;
            }
            col_indices.push(j);
            values.push(inv_sqrt[i] * inv_sqrt[j]);
        }
        if !diag_done {
            col_indices.push(i);
            values.push(inv_sqrt[i] * inv_sqrt[i]);
        }
        row_offsets.push(col_indices.len());
    }
    NormalizedAdjacency {
        matrix: CsrMatrix {
            n,
            row_offsets,
            col_indices,
            values,
        },
        self_loops: true,
    }
}

/// S̃ = D^{-1/2} S D^{-1/2} over the graph's own degrees, no self-loops.
/// Degree-0 nodes keep all-zero rows.
pub fn normalize_no_self_loops(g: &SparseGraph) -> NormalizedAdjacency {
    normalize_weighted(&CsrMatrix::unit(g))
}

/// Weighted counterpart of [`normalize_no_self_loops`]; degrees are row sums.
/// Diagonal entries of `s`, if any, are dropped.
pub fn normalize_weighted(s: &CsrMatrix) -> NormalizedAdjacency {
    let n = s.n;
    let degrees: Vec<f64> = (0..n)
        .map(|i| {
            let (cols, vals) = s.row(i);
            cols.iter().zip(vals).filter(|(&j, _)| j != i).map(|(_, w)| w).sum()
        })
        .collect();
    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut col_indices = Vec::with_capacity(s.nnz());
    let mut values = Vec::with_capacity(s.nnz());
    row_offsets.push(0);
    for i in 0..n {
        let (cols, vals) = s.row(i);
        for (&j, &w) in cols.iter().zip(vals) {
            if j == i {
                continue;
            }
            let dd = degrees[i] * degrees[j];
            col_indices.push(j);
            values.push(if dd > 0.0 { w / dd.sqrt() } else { 0.0 });
        }
        row_offsets.push(col_indices.len());
    }
    NormalizedAdjacency {
        matrix: CsrMatrix {
            n,
            row_offsets,
            col_indices,
            values,
        },
        self_loops: false,
    }
}

/// Dense node attributes, one row per node. All entries are finite.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix(Array2<f64>);

impl FeatureMatrix {
    pub fn new(data: Array2<f64>) -> Result<Self> {
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            let c = data.ncols().max(1);
            return Err(AmlpError::invalid(format!(
                "non-finite feature at row {}, column {}",
                pos / c,
                pos % c
            )));
        }
        Ok(FeatureMatrix(data.as_standard_layout().into_owned()))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != n_cols) {
            return Err(AmlpError::shape("FeatureMatrix::from_rows", n_cols, rows[i].len()));
        }
        let flat = rows.iter().flatten().copied().collect();
        let data = Array2::from_shape_vec((rows.len(), n_cols), flat)
            .map_err(|e| AmlpError::invalid(e.to_string()))?;
        Self::new(data)
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        FeatureMatrix(Array2::zeros((n_rows, n_cols)))
    }

    /// Caller guarantees finiteness and standard layout.
    pub(crate) fn from_array_unchecked(data: Array2<f64>) -> Self {
        debug_assert!(data.is_standard_layout());
        FeatureMatrix(data)
    }

    pub fn n_rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.0.row(i)
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn into_array(self) -> Array2<f64> {
        self.0
    }

    /// Row-major contiguous storage.
    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice().expect("standard layout")
    }
}

/// Integer class labels; `-1` marks an unlabeled node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelVector(Vec<i64>);

impl LabelVector {
    pub const UNLABELED: i64 = -1;

    pub fn new(labels: Vec<i64>) -> Result<Self> {
        if let Some(i) = labels.iter().position(|&l| l < Self::UNLABELED) {
            return Err(AmlpError::invalid(format!("label {} at node {i}", labels[i])));
        }
        Ok(LabelVector(labels))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> Option<usize> {
        usize::try_from(self.0[i]).ok()
    }

    /// One past the largest label; 0 when nothing is labeled.
    pub fn n_classes(&self) -> usize {
        self.0.iter().copied().max().map_or(0, |m| (m + 1).max(0) as usize)
    }

    pub fn labeled_indices(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] >= 0).collect()
    }
}
