use ndarray::{Array2, ArrayView2};

use super::{normalize_with_self_loops, FeatureMatrix, NormalizedAdjacency, SparseGraph};
use crate::error::{AmlpError, Result};
use crate::par::{for_each_row_block, Execution, SPARSE_ROW_BLOCK};

pub const DEFAULT_EPS_NORM: f64 = 1e-12;

/// Classical neighborhood reductions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Aggregator {
    Mean,
    Max,
    Sum,
    /// GCN-style ÃX, including the node itself through Ã's diagonal.
    WeightedSum,
}

impl Aggregator {
    pub const ALL: [Aggregator; 4] = [
        Aggregator::Mean,
        Aggregator::Max,
        Aggregator::Sum,
        Aggregator::WeightedSum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Aggregator::Mean => "mean",
            Aggregator::Max => "max",
            Aggregator::Sum => "sum",
            Aggregator::WeightedSum => "weighted-sum",
        }
    }
}

impl std::str::FromStr for Aggregator {
    type Err = AmlpError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "mean" => Ok(Aggregator::Mean),
            "max" => Ok(Aggregator::Max),
            "sum" => Ok(Aggregator::Sum),
            "weighted-sum" | "weightedsum" => Ok(Aggregator::WeightedSum),
            other => Err(AmlpError::invalid(format!("unknown aggregator '{other}'"))),
        }
    }
}

/// Sparse-dense product on raw arrays. `m` must have `adj.n_nodes()` rows.
pub(crate) fn spmm_array(
    adj: &NormalizedAdjacency,
    m: ArrayView2<'_, f64>,
    exec: Execution,
) -> Array2<f64> {
    let c = m.ncols();
    let m = m.as_standard_layout();
    let src = m.as_slice().expect("standard layout");
    let mut out = vec![0.0; adj.n_nodes() * c];
    for_each_row_block(&mut out, c, SPARSE_ROW_BLOCK, exec, |first, block| {
        for (r, out_row) in block.chunks_mut(c).enumerate() {
            let (cols, vals) = adj.row(first + r);
            for (&j, &w) in cols.iter().zip(vals) {
                let src_row = &src[j * c..(j + 1) * c];
                for (o, &x) in out_row.iter_mut().zip(src_row) {
                    *o += w * x;
                }
            }
        }
    });
    Array2::from_shape_vec((adj.n_nodes(), c), out).expect("shape")
}

pub fn spmm(adj: &NormalizedAdjacency, m: &FeatureMatrix) -> Result<FeatureMatrix> {
    spmm_with(adj, m, Execution::default())
}

pub fn spmm_with(
    adj: &NormalizedAdjacency,
    m: &FeatureMatrix,
    exec: Execution,
) -> Result<FeatureMatrix> {
    if adj.n_nodes() != m.n_rows() {
        return Err(AmlpError::shape("spmm", adj.n_nodes(), m.n_rows()));
    }
    Ok(FeatureMatrix::from_array_unchecked(spmm_array(adj, m.view(), exec)))
}

/// `adjᵏ · x` by `k` successive sparse products; the power is never formed.
pub fn propagate(adj: &NormalizedAdjacency, x: &FeatureMatrix, k: usize) -> Result<FeatureMatrix> {
    propagate_with(adj, x, k, Execution::default())
}

pub fn propagate_with(
    adj: &NormalizedAdjacency,
    x: &FeatureMatrix,
    k: usize,
    exec: Execution,
) -> Result<FeatureMatrix> {
    if k == 0 {
        return Err(AmlpError::invalid("propagation hop count must be at least 1"));
    }
    let mut cur = spmm_with(adj, x, exec)?;
    for _ in 1..k {
        cur = spmm_with(adj, &cur, exec)?;
    }
    Ok(cur)
}

/// Reduces each node's neighbor rows with `kind`. Nodes without neighbors get
/// a zero row for Mean, Max and Sum. `a_tilde` is only read by WeightedSum and
/// is computed from `g` when not supplied.
pub fn aggregate(
    kind: Aggregator,
    g: &SparseGraph,
    x: &FeatureMatrix,
    a_tilde: Option<&NormalizedAdjacency>,
) -> Result<FeatureMatrix> {
    if g.n_nodes() != x.n_rows() {
        return Err(AmlpError::shape("aggregate", g.n_nodes(), x.n_rows()));
    }
    if kind == Aggregator::WeightedSum {
        return match a_tilde {
            Some(a) => spmm(a, x),
            None => spmm(&normalize_with_self_loops(g), x),
        };
    }
    let c = x.n_cols();
    let src = x.as_slice();
    let mut out = vec![0.0; g.n_nodes() * c];
    for_each_row_block(&mut out, c, SPARSE_ROW_BLOCK, Execution::default(), |first, block| {
        for (r, out_row) in block.chunks_mut(c).enumerate() {
            let nbrs = g.neighbors(first + r);
            if nbrs.is_empty() {
                continue;
            }
            match kind {
                Aggregator::Max => {
                    out_row.copy_from_slice(&src[nbrs[0] * c..(nbrs[0] + 1) * c]);
                    for &j in &nbrs[1..] {
                        for (o, &v) in out_row.iter_mut().zip(&src[j * c..(j + 1) * c]) {
                            if v > *o {
                                *o = v;
                            }
                        }
                    }
                }
                Aggregator::Sum | Aggregator::Mean => {
                    for &j in nbrs {
                        for (o, &v) in out_row.iter_mut().zip(&src[j * c..(j + 1) * c]) {
                            *o += v;
                        }
                    }
                    if kind == Aggregator::Mean {
                        let deg = nbrs.len() as f64;
                        out_row.iter_mut().for_each(|o| *o /= deg);
                    }
                }
                Aggregator::WeightedSum => unreachable!(),
            }
        }
    });
    Ok(FeatureMatrix::from_array_unchecked(
        Array2::from_shape_vec((g.n_nodes(), c), out).expect("shape"),
    ))
}

/// Row-normalizes `m`, returning the normalized rows and the original norms.
/// Rows with norm below `eps_norm` become zero rows.
pub(crate) fn row_normalize_array(m: ArrayView2<'_, f64>, eps_norm: f64) -> (Array2<f64>, Vec<f64>) {
    let mut out = m.to_owned();
    let mut norms = Vec::with_capacity(m.nrows());
    for mut row in out.rows_mut() {
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < eps_norm {
            row.fill(0.0);
        } else {
            row.mapv_inplace(|v| v / norm);
        }
        norms.push(norm);
    }
    (out, norms)
}

pub fn row_normalize(m: &FeatureMatrix, eps_norm: f64) -> FeatureMatrix {
    FeatureMatrix::from_array_unchecked(row_normalize_array(m.view(), eps_norm).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::normalize_no_self_loops;
    use ndarray::array;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fm(a: Array2<f64>) -> FeatureMatrix {
        FeatureMatrix::new(a).unwrap()
    }

    fn random_graph(n: usize, m: usize, seed: u64) -> SparseGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let edges: Vec<_> = (0..m)
            .map(|_| (rng.random_range(0..n), rng.random_range(0..n)))
            .collect();
        SparseGraph::from_edges(&edges, n).unwrap()
    }

    fn random_features(n: usize, d: usize, seed: u64) -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        fm(Array2::from_shape_fn((n, d), |_| rng.random_range(-1.0..1.0)))
    }

    #[test]
    fn spmm_row_swap_and_identity() {
        let g = SparseGraph::from_edges(&[(0, 1)], 2).unwrap();
        let s = normalize_no_self_loops(&g);
        let x = fm(array![[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(spmm(&s, &x).unwrap().into_array(), array![[3.0, 4.0], [1.0, 2.0]]);

        let id = normalize_with_self_loops(&SparseGraph::empty(2));
        assert_eq!(spmm(&id, &x).unwrap(), x);
    }

    #[test]
    fn spmm_matches_dense_oracle() {
        let g = random_graph(30, 80, 3);
        let adj = normalize_no_self_loops(&g);
        let x = random_features(30, 6, 4);
        let dense = adj.to_dense().dot(x.as_array());
        let got = spmm(&adj, &x).unwrap();
        let diff = (&dense - got.as_array()).mapv(f64::abs).fold(0.0f64, |a, &b| a.max(b));
        assert!(diff <= 1e-12, "{diff}");
    }

    #[test]
    fn spmm_rejects_mismatch() {
        let adj = normalize_with_self_loops(&SparseGraph::empty(3));
        assert!(spmm(&adj, &FeatureMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn spmm_sequential_equals_parallel() {
        let g = random_graph(700, 4000, 5);
        let adj = normalize_with_self_loops(&g);
        let x = random_features(700, 16, 6);
        let a = spmm_with(&adj, &x, Execution::Sequential).unwrap();
        let b = spmm_with(&adj, &x, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn propagate_cases() {
        let g = SparseGraph::from_edges(&[(0, 1)], 2).unwrap();
        let s = normalize_no_self_loops(&g);
        let x = fm(array![[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(propagate(&s, &x, 2).unwrap(), x);
        assert_eq!(propagate(&s, &x, 1).unwrap(), spmm(&s, &x).unwrap());
        assert!(propagate(&s, &x, 0).is_err());
    }

    #[test]
    fn propagate_matches_dense_power() {
        for (k, seed) in [(3usize, 1u64), (1, 2), (5, 3), (2, 4)] {
            let g = random_graph(20, 45, seed);
            let s = normalize_no_self_loops(&g);
            let x = random_features(20, 4, seed + 100);
            let d = s.to_dense();
            let mut oracle = x.as_array().clone();
            for _ in 0..k {
                oracle = d.dot(&oracle);
            }
            let got = propagate(&s, &x, k).unwrap();
            let scale = oracle.iter().fold(1e-300f64, |a, v| a.max(v.abs()));
            for (a, b) in oracle.iter().zip(got.as_array()) {
                assert!((a - b).abs() / scale <= 1e-10);
            }
        }
    }

    #[test]
    fn two_neighbor_reductions() {
        // node 0 has neighbors 1 and 2
        let g = SparseGraph::from_edges(&[(0, 1), (0, 2)], 3).unwrap();
        let x = fm(array![[9.0, 9.0], [1.0, 2.0], [3.0, 4.0]]);
        let row0 = |k| aggregate(k, &g, &x, None).unwrap().row(0).to_vec();
        assert_eq!(row0(Aggregator::Mean), vec![2.0, 3.0]);
        assert_eq!(row0(Aggregator::Max), vec![3.0, 4.0]);
        assert_eq!(row0(Aggregator::Sum), vec![4.0, 6.0]);
    }

    #[test]
    fn weighted_sum_is_gcn_product() {
        let g = SparseGraph::from_edges(&[(0, 1)], 2).unwrap();
        let x = fm(array![[1.0, 0.0], [0.0, 1.0]]);
        let y = aggregate(Aggregator::WeightedSum, &g, &x, None).unwrap();
        for v in y.as_array() {
            assert!((v - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn isolated_node_gets_zero_row() {
        let g = SparseGraph::from_edges(&[(0, 1)], 3).unwrap();
        let x = fm(array![[1.0, -2.0], [3.0, 4.0], [5.0, 6.0]]);
        for kind in [Aggregator::Mean, Aggregator::Max, Aggregator::Sum] {
            let y = aggregate(kind, &g, &x, None).unwrap();
            assert_eq!(y.row(2).to_vec(), vec![0.0, 0.0]);
        }
    }

    #[test]
    fn sum_is_degree_scaled_mean() {
        let g = random_graph(60, 150, 9);
        let x = random_features(60, 5, 10);
        let sum = aggregate(Aggregator::Sum, &g, &x, None).unwrap();
        let mean = aggregate(Aggregator::Mean, &g, &x, None).unwrap();
        for i in 0..60 {
            let deg = g.degree(i) as f64;
            if deg == 0.0 {
                continue;
            }
            for j in 0..5 {
                let back = mean.as_array()[[i, j]] * deg;
                let s = sum.as_array()[[i, j]];
                assert!((back - s).abs() <= 4.0 * f64::EPSILON * s.abs().max(1.0));
            }
        }
    }

    #[test]
    fn aggregator_parse() {
        assert_eq!("weighted_sum".parse::<Aggregator>().unwrap(), Aggregator::WeightedSum);
        assert!("median".parse::<Aggregator>().is_err());
    }

    #[test]
    fn row_normalize_cases() {
        let y = row_normalize(&fm(array![[3.0, 4.0], [0.0, 0.0]]), DEFAULT_EPS_NORM);
        assert!((y.as_array()[[0, 0]] - 0.6).abs() < 1e-15);
        assert!((y.as_array()[[0, 1]] - 0.8).abs() < 1e-15);
        assert_eq!(y.row(1).to_vec(), vec![0.0, 0.0]);
    }

    proptest! {
        #[test]
        fn normalized_rows_have_unit_or_zero_norm(
            data in proptest::collection::vec(-1e3f64..1e3, 1..60),
            zero_row in any::<bool>(),
        ) {
            let cols = 3;
            let n = data.len() / cols;
            prop_assume!(n > 0);
            let mut a = Array2::from_shape_vec((n, cols), data[..n * cols].to_vec()).unwrap();
            if zero_row {
                a.row_mut(0).fill(0.0);
            }
            let y = row_normalize(&fm(a), DEFAULT_EPS_NORM);
            for row in y.as_array().rows() {
                let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                prop_assert!(norm == 0.0 || (norm - 1.0).abs() <= 1e-12);
            }
        }
    }
}
