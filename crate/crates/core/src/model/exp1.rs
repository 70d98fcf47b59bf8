//! Autoencoder comparison of classical aggregators, trained with the decoder
//! loss alone or with the decoder loss plus λ‖AXW − XW‖²_F (raw A, no
//! self-loops). Reports the Dirichlet energy of the learned embedding.

use super::{optimize, AmlpConfig, Objective};
use crate::error::{AmlpError, Result};
use crate::graph::{
    aggregate, dirichlet_energy, normalize_with_self_loops, row_normalize_array, Aggregator,
    FeatureMatrix, SparseGraph,
};

/// Returns `(Dr, Ŷ)` for one aggregator. `cfg` supplies hidden size, epochs,
/// learning rate, seed and eps_norm; its `k` and `lambda` are not used.
pub fn exp1_train(
    g: &SparseGraph,
    x: &FeatureMatrix,
    kind: Aggregator,
    use_agg_loss: bool,
    lambda: f64,
    cfg: &AmlpConfig,
) -> Result<(f64, FeatureMatrix)> {
    cfg.validate()?;
    if g.n_nodes() < 2 {
        return Err(AmlpError::invalid("training needs at least two nodes"));
    }
    if x.n_rows() != g.n_nodes() {
        return Err(AmlpError::shape("exp1_train", g.n_nodes(), x.n_rows()));
    }
    let a_tilde = normalize_with_self_loops(g);
    let input = aggregate(kind, g, x, Some(&a_tilde))?.into_array();
    let ax = aggregate(Aggregator::Sum, g, x, None)?;
    let diff = ax.as_array() - x.as_array();
    let agg_weight = if use_agg_loss { lambda } else { 0.0 };
    let objective = Objective::new(input, diff, &a_tilde, agg_weight, 1.0, cfg.eps_norm)?;
    let opt = optimize(&objective, cfg)?;
    let y = objective.embed(&opt.weights);
    let y_hat = FeatureMatrix::from_array_unchecked(row_normalize_array(y.view(), cfg.eps_norm).0);
    Ok((dirichlet_energy(&a_tilde, &y_hat)?, y_hat))
}
