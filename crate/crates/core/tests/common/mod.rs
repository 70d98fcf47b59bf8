#![allow(dead_code)]

use amlp::graph::{FeatureMatrix, SparseGraph};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Erdős–Rényi graph with edge probability `p`.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> SparseGraph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                edges.push((i, j));
            }
        }
    }
    SparseGraph::from_edges(&edges, n).unwrap()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-1.0..1.0))
}

pub fn random_features(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> FeatureMatrix {
    FeatureMatrix::new(random_matrix(rng, rows, cols)).unwrap()
}

/// (D+I)^-1/2 (A+I) (D+I)^-1/2 from the dense adjacency.
pub fn dense_a_tilde(a: &Array2<f64>) -> Array2<f64> {
    let n = a.nrows();
    let mut m = a.clone() + Array2::<f64>::eye(n);
    let d: Vec<f64> = m.rows().into_iter().map(|r| r.sum()).collect();
    for i in 0..n {
        for j in 0..n {
            m[[i, j]] /= (d[i] * d[j]).sqrt();
        }
    }
    m
}

/// D^-1/2 A D^-1/2 without self-loops; isolated nodes give zero rows.
pub fn dense_s_tilde(a: &Array2<f64>) -> Array2<f64> {
    let n = a.nrows();
    let d: Vec<f64> = a.rows().into_iter().map(|r| r.sum()).collect();
    let mut m = a.clone();
    for i in 0..n {
        for j in 0..n {
            m[[i, j]] = if d[i] > 0.0 && d[j] > 0.0 { a[[i, j]] / (d[i] * d[j]).sqrt() } else { 0.0 };
        }
    }
    m
}

pub fn dense_power(m: &Array2<f64>, k: usize) -> Array2<f64> {
    let mut out = Array2::<f64>::eye(m.nrows());
    for _ in 0..k {
        out = out.dot(m);
    }
    out
}

pub fn normalize_rows(y: &Array2<f64>) -> Array2<f64> {
    let mut out = y.clone();
    for mut r in out.rows_mut() {
        let n = r.dot(&r).sqrt();
        if n > 1e-12 {
            r /= n;
        } else {
            r.fill(0.0);
        }
    }
    out
}

/// (1/N²)‖ŶŶᵀ − Ã‖²_F with the N×N matrix formed explicitly.
pub fn dense_loss_rec(y: &Array2<f64>, a_tilde: &Array2<f64>) -> f64 {
    let n = y.nrows() as f64;
    let yh = normalize_rows(y);
    let r = yh.dot(&yh.t()) - a_tilde;
    r.iter().map(|v| v * v).sum::<f64>() / (n * n)
}

/// ∂/∂Y of [`dense_loss_rec`], with the N×N residual formed explicitly.
pub fn dense_loss_rec_grad_y(y: &Array2<f64>, a_tilde: &Array2<f64>) -> Array2<f64> {
    let n = y.nrows();
    let yh = normalize_rows(y);
    let r = yh.dot(&yh.t()) - a_tilde;
    let g_hat = r.dot(&yh) * (4.0 / (n * n) as f64);
    let mut g = Array2::zeros(y.dim());
    for i in 0..n {
        let norm = y.row(i).dot(&y.row(i)).sqrt();
        if norm <= 1e-12 {
            continue;
        }
        // (I − ŷŷᵀ)/‖y‖ applied to the row gradient
        for a in 0..y.ncols() {
            let mut s = 0.0;
            for b in 0..y.ncols() {
                let jac = if a == b { 1.0 } else { 0.0 } - yh[[i, a]] * yh[[i, b]];
                s += jac * g_hat[[i, b]];
            }
            g[[i, a]] = s / norm;
        }
    }
    g
}

/// Central differences of `f` at `w` with step `h`.
pub fn finite_difference(f: impl Fn(&Array2<f64>) -> f64, w: &Array2<f64>, h: f64) -> Array2<f64> {
    let mut g = Array2::zeros(w.dim());
    let mut probe = w.clone();
    for idx in ndarray::indices(w.dim()) {
        let orig = probe[idx];
        probe[idx] = orig + h;
        let up = f(&probe);
        probe[idx] = orig - h;
        let down = f(&probe);
        probe[idx] = orig;
        g[idx] = (up - down) / (2.0 * h);
    }
    g
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Largest entrywise error relative to the largest magnitude of either side.
pub fn max_rel_err(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let scale = a.iter().chain(b.iter()).fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    a.iter().zip(b.iter()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}
