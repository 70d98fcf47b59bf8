use super::{FeatureMatrix, LabelVector, NormalizedAdjacency, SparseGraph};
use crate::error::{AmlpError, Result};
use crate::par::{map_indexed, Execution};

/// Σᵢⱼ Ãᵢⱼ ‖Ŷᵢ − Ŷⱼ‖² over all ordered pairs stored in `a_tilde`.
///
/// Both orientations of an edge are counted. Row partial sums are added in
/// row order so the result is reproducible.
pub fn dirichlet_energy(a_tilde: &NormalizedAdjacency, y_hat: &FeatureMatrix) -> Result<f64> {
    if a_tilde.n_nodes() != y_hat.n_rows() {
        return Err(AmlpError::shape("dirichlet_energy", a_tilde.n_nodes(), y_hat.n_rows()));
    }
    let c = y_hat.n_cols();
    let y = y_hat.as_slice();
    let rows = map_indexed(a_tilde.n_nodes(), Execution::default(), |i| {
        let yi = &y[i * c..(i + 1) * c];
        let (cols, vals) = a_tilde.row(i);
        let mut acc = 0.0;
        for (&j, &w) in cols.iter().zip(vals) {
            let yj = &y[j * c..(j + 1) * c];
            let sq: f64 = yi.iter().zip(yj).map(|(a, b)| (a - b) * (a - b)).sum();
            acc += w * sq;
        }
        acc
    });
    Ok(rows.iter().sum())
}

/// Node homophily: the mean, over labeled nodes with at least one neighbor, of
/// the fraction of neighbors sharing the node's label.
pub fn homophily_ratio(g: &SparseGraph, labels: &LabelVector) -> Result<f64> {
    if labels.len() != g.n_nodes() {
        return Err(AmlpError::shape("homophily_ratio", g.n_nodes(), labels.len()));
    }
    let l = labels.as_slice();
    let mut total = 0.0;
    let mut count = 0usize;
    for v in 0..g.n_nodes() {
        let nbrs = g.neighbors(v);
        if l[v] < 0 || nbrs.is_empty() {
            continue;
        }
        let same = nbrs.iter().filter(|&&u| l[u] == l[v]).count();
        total += same as f64 / nbrs.len() as f64;
        count += 1;
    }
    if count == 0 {
        return Err(AmlpError::invalid(
            "homophily ratio needs a labeled node with at least one neighbor",
        ));
    }
    Ok(total / count as f64)
}
