use crate::error::{AmlpError, Result};
use crate::graph::{row_normalize_array, FeatureMatrix, SparseGraph, DEFAULT_EPS_NORM};

/// High-order dissimilarity of nodes `i` and `j`, returned as `(M, N)`:
///
/// * `M = ‖X̂ᵢ − X̂ⱼ‖² + ‖Âᵢ − Âⱼ‖²`
/// * `N = Σ_{m ∉ {i,j}} |X̂ᵢ·X̂ₘ − X̂ⱼ·X̂ₘ| + |Âᵢ·Âₘ − Âⱼ·Âₘ|`
///
/// with row-normalized features X̂ and adjacency rows Â; zero rows stay zero.
pub fn high_order_dissimilarity(
    x: &FeatureMatrix,
    g: &SparseGraph,
    i: usize,
    j: usize,
) -> Result<(f64, f64)> {
    let n = g.n_nodes();
    if x.n_rows() != n {
        return Err(AmlpError::shape("high_order_dissimilarity", n, x.n_rows()));
    }
    if i >= n || j >= n {
        return Err(AmlpError::invalid(format!("node pair ({i}, {j}) out of range for {n} nodes")));
    }
    if i == j {
        return Ok((0.0, 0.0));
    }
    let (x_hat, _) = row_normalize_array(x.view(), DEFAULT_EPS_NORM);
    let diff = &x_hat.row(i) - &x_hat.row(j);

    let inv_sqrt_deg: Vec<f64> = (0..n)
        .map(|v| match g.degree(v) {
            0 => 0.0,
            d => 1.0 / (d as f64).sqrt(),
        })
        .collect();

    // ‖Âᵢ − Âⱼ‖² by merging the two sorted neighbor lists.
    let (ni, nj) = (g.neighbors(i), g.neighbors(j));
    let (wi, wj) = (inv_sqrt_deg[i], inv_sqrt_deg[j]);
    let mut adj_sq = 0.0;
    let (mut a, mut b) = (0, 0);
    while a < ni.len() || b < nj.len() {
        let (u, v) = (ni.get(a).copied(), nj.get(b).copied());
        let d = match (u, v) {
            (Some(u), Some(v)) if u == v => {
                a += 1;
                b += 1;
                wi - wj
            }
            (Some(u), Some(v)) if u < v => {
                a += 1;
                wi
            }
            (Some(_), None) => {
                a += 1;
                wi
            }
            _ => {
                b += 1;
                -wj
            }
        };
        adj_sq += d * d;
    }
    let m_term = diff.dot(&diff) + adj_sq;

    // Two-hop walk counts give common-neighbor counts with every m.
    let common = |v: usize| {
        let mut counts = vec![0usize; n];
        for &u in g.neighbors(v) {
            for &m in g.neighbors(u) {
                counts[m] += 1;
            }
        }
        counts
    };
    let (ci, cj) = (common(i), common(j));

    let mut n_term = 0.0;
    for m in 0..n {
        if m == i || m == j {
            continue;
        }
        n_term += diff.dot(&x_hat.row(m)).abs();
        let wm = inv_sqrt_deg[m];
        let ai = ci[m] as f64 * wi * wm;
        let aj = cj[m] as f64 * wj * wm;
        n_term += (ai - aj).abs();
    }
    Ok((m_term, n_term))
}
