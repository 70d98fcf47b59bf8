//! Graph refinement: an edge survives when the squared product of the
//! feature cosine and the adjacency-row cosine of its endpoints clears a
//! threshold. A sigmoid-smoothed variant yields weights instead of a cut.

use serde::{Deserialize, Serialize};

use crate::error::{AmlpError, Result};
use crate::graph::{CsrMatrix, FeatureMatrix, SparseGraph};
use crate::par::{map_indexed, Execution};

pub const DEFAULT_EPSILON: f64 = 0.001;
pub const DEFAULT_ALL_PAIRS_CAP: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CandidatePolicy {
    /// Score only the edges already present in the input graph.
    #[default]
    OriginalEdges,
    /// Score every unordered pair. Quadratic; capped by `all_pairs_cap`.
    AllPairs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReconstructionMode {
    #[default]
    Hard,
    Soft,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconstructionConfig {
    pub epsilon: f64,
    pub candidate_policy: CandidatePolicy,
    pub mode: ReconstructionMode,
    /// Sigmoid steepness, soft mode only.
    pub steepness: f64,
    pub all_pairs_cap: usize,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        ReconstructionConfig {
            epsilon: DEFAULT_EPSILON,
            candidate_policy: CandidatePolicy::OriginalEdges,
            mode: ReconstructionMode::Hard,
            steepness: 1000.0,
            all_pairs_cap: DEFAULT_ALL_PAIRS_CAP,
        }
    }
}

impl ReconstructionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(AmlpError::Config(format!("epsilon {} not in (0, 1)", self.epsilon)));
        }
        if !(self.steepness > 0.0) || !self.steepness.is_finite() {
            return Err(AmlpError::Config(format!("steepness {} must be positive", self.steepness)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionStats {
    pub candidates_scored: usize,
    pub edges_kept: usize,
    pub edges_removed: usize,
    pub mean_score: f64,
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    let denom = na.sqrt() * nb.sqrt();
    if denom > 0.0 {
        dot / denom
    } else {
        0.0
    }
}

/// `(cos(xᵢ, xⱼ) · cos(aᵢ, aⱼ))²`, or 0 when either cosine is undefined.
pub fn pair_score(x_i: &[f64], x_j: &[f64], a_i: &[f64], a_j: &[f64]) -> f64 {
    let s = cosine(x_i, x_j) * cosine(a_i, a_j);
    (s * s).clamp(0.0, 1.0)
}

pub fn sigmoid_weight(score: f64, epsilon: f64, steepness: f64) -> f64 {
    1.0 / (1.0 + (-steepness * (score - epsilon)).exp())
}

fn sorted_intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Scores every candidate pair `(i, j)`, `i < j`, grouped by `i`.
fn score_candidates(
    g: &SparseGraph,
    x: &FeatureMatrix,
    cfg: &ReconstructionConfig,
    exec: Execution,
) -> Result<Vec<Vec<(usize, f64)>>> {
    let n = g.n_nodes();
    if x.n_rows() != n {
        return Err(AmlpError::shape("reconstruct", n, x.n_rows()));
    }
    if cfg.candidate_policy == CandidatePolicy::AllPairs && n > cfg.all_pairs_cap {
        return Err(AmlpError::invalid(format!(
            "all_pairs candidate policy refused for {n} nodes (cap {})",
            cfg.all_pairs_cap
        )));
    }
    let d = x.n_cols();
    let xs = x.as_slice();
    let x_norm: Vec<f64> = (0..n)
        .map(|i| xs[i * d..(i + 1) * d].iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    let a_norm: Vec<f64> = (0..n).map(|i| (g.degree(i) as f64).sqrt()).collect();

    let score = |i: usize, j: usize| -> f64 {
        let xd = x_norm[i] * x_norm[j];
        let ad = a_norm[i] * a_norm[j];
        if xd == 0.0 || ad == 0.0 {
            return 0.0;
        }
        let dot: f64 = xs[i * d..(i + 1) * d]
            .iter()
            .zip(&xs[j * d..(j + 1) * d])
            .map(|(a, b)| a * b)
            .sum();
        let common = sorted_intersection_len(g.neighbors(i), g.neighbors(j)) as f64;
        let s = (dot / xd) * (common / ad);
        (s * s).clamp(0.0, 1.0)
    };

    Ok(map_indexed(n, exec, |i| match cfg.candidate_policy {
        CandidatePolicy::OriginalEdges => g
            .neighbors(i)
            .iter()
            .filter(|&&j| j > i)
            .map(|&j| (j, score(i, j)))
            .collect(),
        CandidatePolicy::AllPairs => (i + 1..n).map(|j| (j, score(i, j))).collect(),
    }))
}

fn stats(scored: &[Vec<(usize, f64)>], kept: usize) -> ReconstructionStats {
    let candidates: usize = scored.iter().map(Vec::len).sum();
    let total: f64 = scored.iter().flatten().map(|&(_, s)| s).sum();
    ReconstructionStats {
        candidates_scored: candidates,
        edges_kept: kept,
        edges_removed: candidates - kept,
        mean_score: if candidates > 0 { total / candidates as f64 } else { 0.0 },
    }
}

/// Keeps candidate pairs whose score is at least `cfg.epsilon`.
pub fn reconstruct_hard(
    g: &SparseGraph,
    x: &FeatureMatrix,
    cfg: &ReconstructionConfig,
) -> Result<(SparseGraph, ReconstructionStats)> {
    cfg.validate()?;
    let scored = score_candidates(g, x, cfg, Execution::default())?;
    let mut pairs = Vec::new();
    for (i, row) in scored.iter().enumerate() {
        for &(j, s) in row {
            if s >= cfg.epsilon {
                pairs.push((i, j));
                pairs.push((j, i));
            }
        }
    }
    let kept = pairs.len() / 2;
    pairs.sort_unstable();
    let s = SparseGraph::from_sorted_directed(&pairs, g.n_nodes());
    Ok((s, stats(&scored, kept)))
}

/// Replaces the hard cut with `1 / (1 + exp(-steepness · (score - epsilon)))`
/// on the same candidate set. Stats count weights `>= 0.5` as kept.
pub fn reconstruct_soft(
    g: &SparseGraph,
    x: &FeatureMatrix,
    cfg: &ReconstructionConfig,
) -> Result<(CsrMatrix, ReconstructionStats)> {
    cfg.validate()?;
    let scored = score_candidates(g, x, cfg, Execution::default())?;
    let mut triples = Vec::new();
    let mut kept = 0;
    for (i, row) in scored.iter().enumerate() {
        for &(j, s) in row {
            let w = sigmoid_weight(s, cfg.epsilon, cfg.steepness);
            if w >= 0.5 {
                kept += 1;
            }
            triples.push((i, j, w));
            triples.push((j, i, w));
        }
    }
    triples.sort_unstable_by_key(|t| (t.0, t.1));
    Ok((CsrMatrix::from_sorted_triples(&triples, g.n_nodes()), stats(&scored, kept)))
}

/// Dispatches on `cfg.mode`. Hard mode returns unit weights.
pub fn reconstruct(
    g: &SparseGraph,
    x: &FeatureMatrix,
    cfg: &ReconstructionConfig,
) -> Result<(CsrMatrix, ReconstructionStats)> {
    match cfg.mode {
        ReconstructionMode::Hard => {
            let (s, st) = reconstruct_hard(g, x, cfg)?;
            Ok((CsrMatrix::unit(&s), st))
        }
        ReconstructionMode::Soft => reconstruct_soft(g, x, cfg),
    }
}
