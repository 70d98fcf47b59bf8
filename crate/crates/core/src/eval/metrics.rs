use serde::{Deserialize, Serialize};

use super::kmeans::kmeans;
use crate::error::{AmlpError, Result};
use crate::graph::{FeatureMatrix, LabelVector};

/// Minimum-cost assignment of rows to distinct columns (`rows <= cols`),
/// Hungarian method with potentials. Returns the column for each row.
pub fn linear_assignment(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let m = cost[0].len();
    assert!(n <= m, "linear_assignment needs rows <= cols");
    const INF: i64 = i64::MAX / 4;
    // 1-based arrays; index 0 is the virtual source.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![INF; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for j in 1..=m {
        if p[j] != 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Positions where the truth is labeled, with both labels as indices.
fn paired(pred: &LabelVector, truth: &LabelVector) -> Result<Vec<(Option<usize>, usize)>> {
    if pred.len() != truth.len() {
        return Err(AmlpError::shape("clustering metric", truth.len(), pred.len()));
    }
    let pairs: Vec<_> = (0..truth.len())
        .filter_map(|i| truth.get(i).map(|t| (pred.get(i), t)))
        .collect();
    if pairs.is_empty() {
        return Err(AmlpError::invalid("clustering metric on empty or unlabeled input"));
    }
    Ok(pairs)
}

/// Fraction of labeled nodes correct under the best one-to-one mapping of
/// predicted clusters to classes.
pub fn hungarian_acc(pred: &LabelVector, truth: &LabelVector) -> Result<f64> {
    let pairs = paired(pred, truth)?;
    let k = pairs.iter().filter_map(|p| p.0).max().map_or(0, |m| m + 1);
    let c = pairs.iter().map(|p| p.1).max().unwrap() + 1;
    let size = k.max(c);
    let mut table = vec![vec![0i64; size]; size];
    for &(p, t) in &pairs {
        if let Some(p) = p {
            table[p][t] += 1;
        }
    }
    let cost: Vec<Vec<i64>> = table.iter().map(|r| r.iter().map(|&x| -x).collect()).collect();
    let matched: i64 = linear_assignment(&cost)
        .iter()
        .enumerate()
        .map(|(r, &col)| table[r][col])
        .sum();
    Ok(matched as f64 / pairs.len() as f64)
}

/// Mutual information normalized by √(H(pred)·H(truth)), natural logs.
/// Identical partitions give 1; otherwise a zero entropy gives 0.
pub fn nmi(pred: &LabelVector, truth: &LabelVector) -> Result<f64> {
    let pairs = paired(pred, truth)?;
    // Unassigned predictions form their own block.
    let pred_ids: Vec<usize> = pairs.iter().map(|p| p.0.map_or(0, |x| x + 1)).collect();
    let truth_ids: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    let kp = pred_ids.iter().max().unwrap() + 1;
    let kt = truth_ids.iter().max().unwrap() + 1;
    let mut table = vec![vec![0usize; kt]; kp];
    for (&a, &b) in pred_ids.iter().zip(&truth_ids) {
        table[a][b] += 1;
    }
    let row: Vec<usize> = table.iter().map(|r| r.iter().sum()).collect();
    let col: Vec<usize> = (0..kt).map(|j| table.iter().map(|r| r[j]).sum()).collect();

    let same_partition = table.iter().all(|r| r.iter().filter(|&&x| x > 0).count() <= 1)
        && (0..kt).all(|j| table.iter().filter(|r| r[j] > 0).count() <= 1);
    if same_partition {
        return Ok(1.0);
    }

    let n = pairs.len() as f64;
    let entropy = |counts: &[usize]| -> f64 {
        counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.ln()
            })
            .sum()
    };
    let (hp, ht) = (entropy(&row), entropy(&col));
    if hp <= 0.0 || ht <= 0.0 {
        return Ok(0.0);
    }
    let mut mi = 0.0;
    for (a, r) in table.iter().enumerate() {
        for (b, &nab) in r.iter().enumerate() {
            if nab == 0 {
                continue;
            }
            let nab = nab as f64;
            mi += nab / n * (n * nab / (row[a] as f64 * col[b] as f64)).ln();
        }
    }
    Ok((mi / (hp * ht).sqrt()).clamp(0.0, 1.0))
}

/// Population mean and standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedMetrics {
    pub seed: u64,
    pub acc: f64,
    pub nmi: f64,
}

/// Clustering scores; `acc` and `nmi` are means over seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub acc: f64,
    pub nmi: f64,
    pub acc_std: f64,
    pub nmi_std: f64,
    pub per_seed: Vec<SeedMetrics>,
}

impl MetricsRecord {
    pub fn from_seeds(per_seed: Vec<SeedMetrics>) -> Self {
        let accs: Vec<f64> = per_seed.iter().map(|s| s.acc).collect();
        let nmis: Vec<f64> = per_seed.iter().map(|s| s.nmi).collect();
        let (acc, acc_std) = mean_std(&accs);
        let (nmi, nmi_std) = mean_std(&nmis);
        MetricsRecord {
            acc,
            nmi,
            acc_std,
            nmi_std,
            per_seed,
        }
    }
}

/// K-means with `k` clusters once per seed, scored against `truth`.
pub fn evaluate_clustering(
    y_hat: &FeatureMatrix,
    truth: &LabelVector,
    k: usize,
    seeds: &[u64],
    restarts: usize,
    max_iter: usize,
) -> Result<MetricsRecord> {
    let mut per_seed = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let res = kmeans(y_hat, k, seed, restarts, max_iter)?;
        let pred = LabelVector::new(res.assignments.iter().map(|&a| a as i64).collect())?;
        per_seed.push(SeedMetrics {
            seed,
            acc: hungarian_acc(&pred, truth)?,
            nmi: nmi(&pred, truth)?,
        });
    }
    Ok(MetricsRecord::from_seeds(per_seed))
}
