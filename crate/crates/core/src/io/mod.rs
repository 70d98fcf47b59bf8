//! File formats: dataset directories, run configurations, checkpoints and
//! JSON reports.

mod checkpoint;
mod config;
mod dataset;
mod format;
mod report;

pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointHeader, CHECKPOINT_FILE, WEIGHTS_FILE};
pub use config::{Grid, RunConfig};
pub use dataset::{
    load_dataset, read_edge_list, read_labels, read_meta, save_dataset, save_splits, write_edges,
    write_json, write_labels, Dataset, DatasetMeta, FeatureEncoding, EDGES_FILE, FEATURES_CSV,
    FEATURES_F32, LABELS_FILE, META_FILE, SPLITS_FILE,
};
pub use format::{format_float, matrix_to_csv, read_matrix_csv, write_matrix_csv, SIGNIFICANT_DIGITS};
pub use report::RunReport;
