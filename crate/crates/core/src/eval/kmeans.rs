use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{AmlpError, Result};
use crate::graph::FeatureMatrix;
use crate::par::{map_indexed, Execution};

pub const DEFAULT_RESTARTS: usize = 10;
pub const DEFAULT_MAX_ITER: usize = 300;

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterResult {
    pub assignments: Vec<usize>,
    pub centroids: Array2<f64>,
    pub inertia: f64,
    pub restarts_used: usize,
}

pub fn kmeans(
    y: &FeatureMatrix,
    k: usize,
    seed: u64,
    restarts: usize,
    max_iter: usize,
) -> Result<ClusterResult> {
    kmeans_with(y, k, seed, restarts, max_iter, Execution::default())
}

/// k-means++ seeding followed by Lloyd iterations; the lowest-inertia
/// restart wins (earliest on ties). Restart `r` draws from stream `r` of a
/// generator seeded with `seed`, so the result does not depend on scheduling.
pub fn kmeans_with(
    y: &FeatureMatrix,
    k: usize,
    seed: u64,
    restarts: usize,
    max_iter: usize,
    exec: Execution,
) -> Result<ClusterResult> {
    let n = y.n_rows();
    if k == 0 || k > n {
        return Err(AmlpError::invalid(format!("cannot form {k} clusters from {n} points")));
    }
    let restarts = restarts.max(1);
    let runs = map_indexed(restarts, exec, |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64);
        let init = plus_plus_init(y, k, &mut rng);
        lloyd(y, init, max_iter).0
    });
    let mut best = None::<(usize, Lloyd)>;
    for (r, run) in runs.into_iter().enumerate() {
        if best.as_ref().is_none_or(|(_, b)| run.inertia < b.inertia) {
            best = Some((r, run));
        }
    }
    let (_, run) = best.expect("at least one restart");
    Ok(ClusterResult {
        assignments: run.assignments,
        centroids: run.centroids,
        inertia: run.inertia,
        restarts_used: restarts,
    })
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn plus_plus_init(y: &FeatureMatrix, k: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let (n, c) = (y.n_rows(), y.n_cols());
    let data = y.as_slice();
    let row = |i: usize| &data[i * c..(i + 1) * c];
    let mut centroids = Array2::zeros((k, c));
    let first = rng.random_range(0..n);
    centroids.row_mut(0).assign(&y.row(first));
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(row(i), row(first))).collect();
    for t in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centroids.row_mut(t).assign(&y.row(pick));
        let new_c = centroids.row(t).to_vec();
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(row(i), &new_c));
        }
    }
    centroids
}

pub(crate) struct Lloyd {
    pub assignments: Vec<usize>,
    pub centroids: Array2<f64>,
    pub inertia: f64,
}

/// Returns the converged state and the inertia after every assignment step.
pub(crate) fn lloyd(y: &FeatureMatrix, mut centroids: Array2<f64>, max_iter: usize) -> (Lloyd, Vec<f64>) {
    let (n, c) = (y.n_rows(), y.n_cols());
    let data = y.as_slice();
    let k = centroids.nrows();

    // Ties keep the current cluster so the iteration cannot cycle.
    let assign = |centroids: &Array2<f64>, current: Option<&[usize]>| -> (Vec<usize>, f64) {
        let cs = centroids.as_slice().expect("standard layout");
        let mut out = Vec::with_capacity(n);
        let mut inertia = 0.0;
        for i in 0..n {
            let p = &data[i * c..(i + 1) * c];
            let mut best = current.map_or(0, |a| a[i]);
            let mut best_d = sq_dist(p, &cs[best * c..(best + 1) * c]);
            for j in 0..k {
                let d = sq_dist(p, &cs[j * c..(j + 1) * c]);
                if d < best_d {
                    best = j;
                    best_d = d;
                }
            }
            out.push(best);
            inertia += best_d;
        }
        (out, inertia)
    };

    // Empty clusters keep their previous centroid.
    let update = |assignments: &[usize], centroids: &mut Array2<f64>| {
        let mut sums = Array2::<f64>::zeros((k, c));
        let mut counts = vec![0usize; k];
        for (i, &a) in assignments.iter().enumerate() {
            counts[a] += 1;
            let mut s = sums.row_mut(a);
            for (acc, &v) in s.iter_mut().zip(&data[i * c..(i + 1) * c]) {
                *acc += v;
            }
        }
        for j in 0..k {
            if counts[j] > 0 {
                let cnt = counts[j] as f64;
                centroids.row_mut(j).assign(&sums.row(j).mapv(|v| v / cnt));
            }
        }
    };

    let (mut assignments, inertia) = assign(&centroids, None);
    let mut trace = vec![inertia];
    for _ in 0..max_iter {
        update(&assignments, &mut centroids);
        let (next, inertia) = assign(&centroids, Some(&assignments));
        trace.push(inertia);
        let stable = next == assignments;
        assignments = next;
        if stable {
            break;
        }
    }
    update(&assignments, &mut centroids);
    let inertia = (0..n)
        .map(|i| {
            let a = assignments[i];
            sq_dist(&data[i * c..(i + 1) * c], centroids.row(a).as_slice().expect("row"))
        })
        .sum();
    (
        Lloyd {
            assignments,
            centroids,
            inertia,
        },
        trace,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn clouds(n_per: usize, seed: u64) -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 0.1).unwrap();
        let mut rows = Vec::new();
        for center in [-10.0, 10.0] {
            for _ in 0..n_per {
                rows.push(vec![center + noise.sample(&mut rng), noise.sample(&mut rng)]);
            }
        }
        FeatureMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn separates_distant_clouds() {
        let y = clouds(20, 1);
        let res = kmeans(&y, 2, 3, 5, 100).unwrap();
        let a = &res.assignments;
        assert!(a[..20].iter().all(|&x| x == a[0]));
        assert!(a[20..].iter().all(|&x| x == a[20]));
        assert_ne!(a[0], a[20]);
    }

    #[test]
    fn single_cluster_is_the_mean() {
        let y = clouds(10, 2);
        let res = kmeans(&y, 1, 0, 3, 50).unwrap();
        let mean = y.as_array().mean_axis(ndarray::Axis(0)).unwrap();
        for (a, b) in res.centroids.row(0).iter().zip(mean.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        let total: f64 = y
            .as_array()
            .rows()
            .into_iter()
            .map(|r| r.iter().zip(mean.iter()).map(|(x, m)| (x - m).powi(2)).sum::<f64>())
            .sum();
        assert!((res.inertia - total).abs() < 1e-9);
    }

    #[test]
    fn matches_exhaustive_two_clustering() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let rows: Vec<Vec<f64>> = (0..8)
                .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
                .collect();
            let y = FeatureMatrix::from_rows(&rows).unwrap();
            let mut best = f64::INFINITY;
            for mask in 1u32..(1 << 8) - 1 {
                let mut cost = 0.0;
                for side in [true, false] {
                    let members: Vec<&Vec<f64>> =
                        (0..8).filter(|&i| ((mask >> i) & 1 == 1) == side).map(|i| &rows[i]).collect();
                    let m = members.len() as f64;
                    let cx = members.iter().map(|r| r[0]).sum::<f64>() / m;
                    let cy = members.iter().map(|r| r[1]).sum::<f64>() / m;
                    cost += members.iter().map(|r| (r[0] - cx).powi(2) + (r[1] - cy).powi(2)).sum::<f64>();
                }
                best = best.min(cost);
            }
            let res = kmeans(&y, 2, 11, 20, 100).unwrap();
            assert!((res.inertia - best).abs() < 1e-9, "{} vs {}", res.inertia, best);
        }
    }

    #[test]
    fn inertia_is_monotone_and_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let y = FeatureMatrix::new(Array2::from_shape_simple_fn((200, 3), || rng.random_range(0.0..1.0)))
            .unwrap();
        for r in 0..5u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(r);
            let init = plus_plus_init(&y, 6, &mut rng);
            let (run, trace) = lloyd(&y, init, 300);
            assert!(trace.windows(2).all(|w| w[1] <= w[0] + 1e-12));
            assert!(run.inertia <= *trace.last().unwrap() + 1e-12);
        }
        let res = kmeans(&y, 6, 1, 4, 300).unwrap();
        let recomputed: f64 = (0..200)
            .map(|i| {
                let c = res.centroids.row(res.assignments[i]);
                y.row(i).iter().zip(c.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
            })
            .sum();
        assert!((res.inertia - recomputed).abs() < 1e-9);
        assert!(res.assignments.iter().all(|&a| a < 6));
    }

    #[test]
    fn deterministic_and_mode_independent() {
        let y = clouds(30, 4);
        let a = kmeans_with(&y, 3, 9, 6, 100, Execution::Sequential).unwrap();
        let b = kmeans_with(&y, 3, 9, 6, 100, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn too_many_clusters() {
        let y = clouds(2, 0);
        assert!(kmeans(&y, 5, 0, 1, 10).is_err());
    }
}
