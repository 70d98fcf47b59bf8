//! The single-layer aggregation-aware network: configuration, losses,
//! analytic gradients, the Adam loop and the aggregator comparison variant.

mod adam;
mod exp1;
mod objective;
mod train;

pub use adam::{adam_step, AdamState, ADAM_EPS, BETA1, BETA2};
pub use exp1::exp1_train;
pub use objective::{forward, gradient, loss_agg, loss_rec, total_loss, LossParts, Objective};
pub use train::{init_weights, optimize, train, Optimized};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{AmlpError, Result};
use crate::graph::DEFAULT_EPS_NORM;
use crate::reconstruct::ReconstructionStats;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AmlpConfig {
    /// Propagation hops.
    pub k: usize,
    pub lambda: f64,
    pub hidden_dim: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub eps_norm: f64,
    /// Stop once |ΔL|/L < 1e-6 for 10 consecutive epochs.
    pub early_stop: bool,
    /// When false the aggregation term is dropped (ablation).
    pub use_agg_loss: bool,
}

impl Default for AmlpConfig {
    fn default() -> Self {
        AmlpConfig {
            k: 3,
            lambda: 0.1,
            hidden_dim: 500,
            learning_rate: 1e-3,
            epochs: 200,
            seed: 0,
            eps_norm: DEFAULT_EPS_NORM,
            early_stop: false,
            use_agg_loss: true,
        }
    }
}

impl AmlpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(AmlpError::Config("k must be at least 1".into()));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(AmlpError::Config(format!("lambda {} must be >= 0", self.lambda)));
        }
        if self.hidden_dim == 0 {
            return Err(AmlpError::Config("hidden_dim must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(AmlpError::Config(format!(
                "learning_rate {} must be positive",
                self.learning_rate
            )));
        }
        if !(self.eps_norm > 0.0) {
            return Err(AmlpError::Config("eps_norm must be positive".into()));
        }
        Ok(())
    }
}

/// Trained weights and the configuration that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct AmlpModel {
    pub weights: Array2<f64>,
    pub config: AmlpConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub l_agg: f64,
    pub l_rec: f64,
    pub loss: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub records: Vec<EpochRecord>,
    pub epochs_run: usize,
    pub early_stopped: bool,
    pub wall_clock_seconds: f64,
    pub final_dirichlet_energy: f64,
    pub reconstruction: Option<ReconstructionStats>,
}
