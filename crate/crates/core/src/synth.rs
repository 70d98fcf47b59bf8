//! Stochastic block models with Gaussian class-conditional features.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{AmlpError, Result};
use crate::graph::{FeatureMatrix, LabelVector, SparseGraph};

const FEATURE_STREAM: u64 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SbmSpec {
    pub n_nodes: usize,
    pub n_classes: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub feature_dim: usize,
    pub class_separation: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SbmSpec {
    /// 400 nodes, 4 classes, p_in = 0.10, p_out = 0.01; 8 feature dims, unit separation and noise.
    pub fn homophilic(seed: u64) -> Self {
        SbmSpec {
            n_nodes: 400,
            n_classes: 4,
            p_in: 0.10,
            p_out: 0.01,
            feature_dim: 8,
            class_separation: 1.0,
            noise_sigma: 1.0,
            seed,
        }
    }

    /// Same sizes as [`SbmSpec::homophilic`] with p_in and p_out swapped.
    pub fn heterophilic(seed: u64) -> Self {
        SbmSpec {
            p_in: 0.01,
            p_out: 0.10,
            ..Self::homophilic(seed)
        }
    }

    pub fn preset(name: &str, seed: u64) -> Result<Self> {
        match name {
            "homophilic" => Ok(Self::homophilic(seed)),
            "heterophilic" => Ok(Self::heterophilic(seed)),
            other => Err(AmlpError::invalid(format!(
                "unknown preset '{other}' (expected homophilic or heterophilic)"
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_in", self.p_in), ("p_out", self.p_out)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(AmlpError::invalid(format!("{name} = {p} is not a probability")));
            }
        }
        if self.n_classes == 0 || self.n_classes > self.n_nodes {
            return Err(AmlpError::invalid(format!(
                "n_classes = {} must be in 1..={}",
                self.n_classes, self.n_nodes
            )));
        }
        if !(self.class_separation.is_finite() && self.class_separation >= 0.0) {
            return Err(AmlpError::invalid("class_separation must be finite and non-negative"));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(AmlpError::invalid("noise_sigma must be finite and non-negative"));
        }
        Ok(())
    }
}

/// Samples graph and labels. Classes are contiguous blocks of sizes differing
/// by at most one; each unordered pair is an edge with probability `p_in`
/// (same class) or `p_out`.
pub fn generate_sbm(spec: &SbmSpec) -> Result<(SparseGraph, LabelVector)> {
    spec.validate()?;
    let (n, c) = (spec.n_nodes, spec.n_classes);
    let labels: Vec<i64> = (0..n).map(|i| (i * c / n) as i64).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = if labels[i] == labels[j] { spec.p_in } else { spec.p_out };
            if rng.random_bool(p) {
                edges.push((i, j));
            }
        }
    }
    Ok((SparseGraph::from_edges(&edges, n)?, LabelVector::new(labels)?))
}

/// Rows are `separation · μ_c + N(0, σ²)` where μ_c is a normalized Gaussian
/// direction per class.
pub fn generate_features(
    labels: &LabelVector,
    feature_dim: usize,
    class_separation: f64,
    noise_sigma: f64,
    seed: u64,
) -> Result<FeatureMatrix> {
    if feature_dim == 0 {
        return Err(AmlpError::invalid("feature_dim must be positive"));
    }
    let noise = Normal::new(0.0, noise_sigma)
        .map_err(|e| AmlpError::invalid(format!("noise_sigma: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(FEATURE_STREAM);
    let means: Vec<Vec<f64>> = (0..labels.n_classes())
        .map(|_| {
            let v: Vec<f64> = (0..feature_dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            v.into_iter().map(|a| class_separation * a / norm).collect()
        })
        .collect();
    let mut x = Array2::zeros((labels.len(), feature_dim));
    for (i, mut row) in x.rows_mut().into_iter().enumerate() {
        let class = labels
            .get(i)
            .ok_or_else(|| AmlpError::invalid(format!("node {i} is unlabeled")))?;
        for (v, &m) in row.iter_mut().zip(&means[class]) {
            *v = m + noise.sample(&mut rng);
        }
    }
    FeatureMatrix::new(x)
}

/// Graph, labels and features for `spec`.
pub fn generate(spec: &SbmSpec) -> Result<(SparseGraph, FeatureMatrix, LabelVector)> {
    let (g, labels) = generate_sbm(spec)?;
    let x = generate_features(
        &labels,
        spec.feature_dim,
        spec.class_separation,
        spec.noise_sigma,
        spec.seed,
    )?;
    Ok((g, x, labels))
}
