//! Sequential vs parallel execution of the hot kernels.
//! With `--no-default-features` both variants run sequentially.

use amlp::eval::kmeans_with;
use amlp::graph::{normalize_no_self_loops, normalize_with_self_loops, propagate_with, FeatureMatrix};
use amlp::model::{init_weights, Objective};
use amlp::par::{matmul, Execution};
use amlp::synth::{generate, SbmSpec};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ndarray::Array2;
use std::hint::black_box;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn problem(n: usize, d: usize) -> (amlp::SparseGraph, FeatureMatrix) {
    let spec = SbmSpec {
        n_nodes: n,
        n_classes: 8,
        p_in: 40.0 / n as f64,
        p_out: 4.0 / n as f64,
        feature_dim: d,
        ..SbmSpec::homophilic(0)
    };
    let (g, x, _) = generate(&spec).unwrap();
    (g, x)
}

fn bench_propagate(c: &mut Criterion) {
    let (g, x) = problem(4000, 128);
    let s = normalize_no_self_loops(&g);
    let mut group = c.benchmark_group("propagate_k3");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| propagate_with(&s, black_box(&x), 3, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_matmul(c: &mut Criterion) {
    let a = Array2::from_shape_fn((2000, 300), |(i, j)| ((i * 7 + j) % 13) as f64 - 6.0);
    let w = init_weights(300, 128, 0);
    let mut group = c.benchmark_group("matmul_2000x300x128");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| matmul(black_box(a.view()), w.view(), exec))
        });
    }
    group.finish();
}

fn bench_gradient(c: &mut Criterion) {
    let (g, x) = problem(2000, 256);
    let a = normalize_with_self_loops(&g);
    let s = normalize_no_self_loops(&g);
    let p = propagate_with(&s, &x, 2, Execution::Sequential).unwrap();
    let z = p.as_array() + x.as_array();
    let diff = p.as_array() - x.as_array();
    let w = init_weights(256, 64, 0);
    let mut group = c.benchmark_group("objective_gradient");
    group.sample_size(20);
    for (name, exec) in MODES {
        let obj = Objective::with_execution(z.clone(), diff.clone(), &a, 1.0, 0.1, 1e-12, exec).unwrap();
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| obj.value_and_gradient(black_box(&w)).unwrap())
        });
    }
    group.finish();
}

fn bench_kmeans(c: &mut Criterion) {
    let (_, x) = problem(2000, 32);
    let mut group = c.benchmark_group("kmeans_10_restarts");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| kmeans_with(black_box(&x), 8, 0, 10, 100, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_propagate, bench_matmul, bench_gradient, bench_kmeans);
criterion_main!(benches);
