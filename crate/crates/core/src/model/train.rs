use std::time::Instant;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{AdamState, AmlpConfig, AmlpModel, EpochRecord, Objective, TrainReport};
use crate::error::{AmlpError, Result};
use crate::graph::{
    dirichlet_energy, normalize_weighted, normalize_with_self_loops, propagate, FeatureMatrix,
    SparseGraph,
};
use crate::reconstruct::{reconstruct, ReconstructionConfig};

const EARLY_STOP_TOL: f64 = 1e-6;
const EARLY_STOP_PATIENCE: usize = 10;

/// d×c weights drawn uniformly from [-1/√c, 1/√c].
pub fn init_weights(d: usize, c: usize, seed: u64) -> Array2<f64> {
    let bound = 1.0 / (c as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_simple_fn((d, c), || rng.random_range(-bound..=bound))
}

pub struct Optimized {
    pub weights: Array2<f64>,
    pub records: Vec<EpochRecord>,
    pub early_stopped: bool,
}

/// Full-batch Adam on `objective` starting from [`init_weights`].
pub fn optimize(objective: &Objective<'_>, cfg: &AmlpConfig) -> Result<Optimized> {
    let mut w = init_weights(objective.input_dim(), cfg.hidden_dim, cfg.seed);
    let mut adam = AdamState::new(w.dim());
    let mut records = Vec::with_capacity(cfg.epochs);
    let mut calm_epochs = 0;
    let mut early_stopped = false;
    for epoch in 0..cfg.epochs {
        let (parts, grad) = objective.value_and_gradient(&w)?;
        if !parts.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(AmlpError::NonFinite {
                epoch,
                l_agg: parts.agg,
                l_rec: parts.rec,
            });
        }
        if let Some(prev) = records.last().map(|r: &EpochRecord| r.loss) {
            let rel = (parts.total - prev).abs() / prev.abs().max(f64::MIN_POSITIVE);
            calm_epochs = if rel < EARLY_STOP_TOL { calm_epochs + 1 } else { 0 };
        }
        records.push(EpochRecord {
            epoch,
            l_agg: parts.agg,
            l_rec: parts.rec,
            loss: parts.total,
        });
        if cfg.early_stop && calm_epochs >= EARLY_STOP_PATIENCE {
            early_stopped = true;
            break;
        }
        adam.update(&mut w, &grad, cfg.learning_rate);
    }
    Ok(Optimized {
        weights: w,
        records,
        early_stopped,
    })
}

/// Reconstruct, propagate, then fit W. Returns the model, the row-normalized
/// embedding Ŷ of `(S̃ᵏX + X) W` and the per-epoch report.
pub fn train(
    g: &SparseGraph,
    x: &FeatureMatrix,
    cfg: &AmlpConfig,
    recon_cfg: &ReconstructionConfig,
) -> Result<(AmlpModel, FeatureMatrix, TrainReport)> {
    let start = Instant::now();
    cfg.validate()?;
    recon_cfg.validate()?;
    if g.n_nodes() < 2 {
        return Err(AmlpError::invalid("training needs at least two nodes"));
    }
    if x.n_rows() != g.n_nodes() {
        return Err(AmlpError::shape("train", g.n_nodes(), x.n_rows()));
    }

    let (s, stats) = reconstruct(g, x, recon_cfg)?;
    let s_tilde = normalize_weighted(&s);
    let a_tilde = normalize_with_self_loops(g);
    let p = propagate(&s_tilde, x, cfg.k)?;
    let objective = Objective::amlp(&p, x, &a_tilde, cfg)?;
    drop(p);

    let opt = optimize(&objective, cfg)?;
    let y = objective.embed(&opt.weights);
    let (y_hat, _) = crate::graph::row_normalize_array(y.view(), cfg.eps_norm);
    let y_hat = FeatureMatrix::from_array_unchecked(y_hat);
    let energy = dirichlet_energy(&a_tilde, &y_hat)?;

    let report = TrainReport {
        epochs_run: opt.records.len(),
        records: opt.records,
        early_stopped: opt.early_stopped,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        final_dirichlet_energy: energy,
        reconstruction: Some(stats),
    };
    let model = AmlpModel {
        weights: opt.weights,
        config: cfg.clone(),
    };
    Ok((model, y_hat, report))
}
