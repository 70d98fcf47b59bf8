//! Run configuration files. `k`, `lambda` and `learning_rate` accept either a
//! scalar or a list; lists expand to a grid in k-major order.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::format::read_text;
use crate::error::{AmlpError, Result};
use crate::eval::{DEFAULT_MAX_ITER, DEFAULT_RESTARTS};
use crate::model::AmlpConfig;
use crate::reconstruct::{CandidatePolicy, ReconstructionConfig, ReconstructionMode};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> Grid<T> {
    pub fn values(&self) -> Vec<T> {
        match self {
            Grid::One(v) => vec![v.clone()],
            Grid::Many(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub k: Grid<usize>,
    pub lambda: Grid<f64>,
    pub learning_rate: Grid<f64>,
    pub hidden_dim: usize,
    pub epochs: usize,
    /// First training seed; runs use `seed..seed + n_seeds`.
    pub seed: u64,
    pub n_seeds: usize,
    pub eps_norm: f64,
    pub early_stop: bool,
    pub use_agg_loss: bool,

    pub epsilon: f64,
    pub candidate_policy: CandidatePolicy,
    pub mode: ReconstructionMode,
    pub steepness: f64,
    pub all_pairs_cap: usize,

    pub kmeans_restarts: usize,
    pub kmeans_max_iter: usize,
    /// Output directory, used when the command line gives none.
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let m = AmlpConfig::default();
        let r = ReconstructionConfig::default();
        RunConfig {
            k: Grid::One(m.k),
            lambda: Grid::One(m.lambda),
            learning_rate: Grid::One(m.learning_rate),
            hidden_dim: m.hidden_dim,
            epochs: m.epochs,
            seed: m.seed,
            n_seeds: 1,
            eps_norm: m.eps_norm,
            early_stop: m.early_stop,
            use_agg_loss: m.use_agg_loss,
            epsilon: r.epsilon,
            candidate_policy: r.candidate_policy,
            mode: r.mode,
            steepness: r.steepness,
            all_pairs_cap: r.all_pairs_cap,
            kmeans_restarts: DEFAULT_RESTARTS,
            kmeans_max_iter: DEFAULT_MAX_ITER,
            output: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(&read_text(path)?)
            .map_err(|e| AmlpError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k.values().is_empty() || self.lambda.values().is_empty() || self.learning_rate.values().is_empty() {
            return Err(AmlpError::Config("grid lists must not be empty".into()));
        }
        if self.n_seeds == 0 {
            return Err(AmlpError::Config("n_seeds must be at least 1".into()));
        }
        for cfg in self.grid() {
            cfg.validate()?;
        }
        self.reconstruction().validate()
    }

    /// One model configuration per grid point, seeded with `self.seed`.
    pub fn grid(&self) -> Vec<AmlpConfig> {
        let mut out = Vec::new();
        for &k in &self.k.values() {
            for &lambda in &self.lambda.values() {
                for &learning_rate in &self.learning_rate.values() {
                    out.push(AmlpConfig {
                        k,
                        lambda,
                        learning_rate,
                        hidden_dim: self.hidden_dim,
                        epochs: self.epochs,
                        seed: self.seed,
                        eps_norm: self.eps_norm,
                        early_stop: self.early_stop,
                        use_agg_loss: self.use_agg_loss,
                    });
                }
            }
        }
        out
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.n_seeds as u64).map(|s| self.seed + s).collect()
    }

    pub fn reconstruction(&self) -> ReconstructionConfig {
        ReconstructionConfig {
            epsilon: self.epsilon,
            candidate_policy: self.candidate_policy,
            mode: self.mode,
            steepness: self.steepness,
            all_pairs_cap: self.all_pairs_cap,
        }
    }
}
