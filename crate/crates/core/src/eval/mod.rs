//! Evaluation: K-means on embeddings, Hungarian-matched accuracy, NMI,
//! stratified splits with a linear probe, and the high-order dissimilarity
//! diagnostic.

mod dissimilarity;
mod kmeans;
mod metrics;
mod probe;
mod splits;

pub use dissimilarity::high_order_dissimilarity;
pub use kmeans::{kmeans, kmeans_with, ClusterResult, DEFAULT_MAX_ITER, DEFAULT_RESTARTS};
pub use metrics::{
    evaluate_clustering, hungarian_acc, linear_assignment, mean_std, nmi, MetricsRecord,
    SeedMetrics,
};
pub use probe::{evaluate_probe, fit_probe, linear_probe, ProbeConfig, ProbeModel, ProbeRecord};
pub use splits::{make_splits, Split, SplitSet};
