//! The dataset directory: `meta.json`, `edges.tsv`, `features.csv` or
//! `features.f32`, `labels.csv` and an optional `splits.json`.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::format::{data_lines, parse_error, read_matrix_csv, read_text, write_matrix_csv, write_text};
use crate::error::{AmlpError, Result};
use crate::eval::SplitSet;
use crate::graph::{FeatureMatrix, LabelVector, SparseGraph};

pub const META_FILE: &str = "meta.json";
pub const EDGES_FILE: &str = "edges.tsv";
pub const LABELS_FILE: &str = "labels.csv";
pub const SPLITS_FILE: &str = "splits.json";
pub const FEATURES_CSV: &str = "features.csv";
pub const FEATURES_F32: &str = "features.f32";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetMeta {
    pub name: String,
    pub num_nodes: usize,
    pub num_features: usize,
    pub num_classes: usize,
    pub features_file: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum FeatureEncoding {
    /// Comma-separated text, 9 significant digits.
    #[default]
    Csv,
    /// Row-major little-endian `f32`.
    F32,
}

impl FeatureEncoding {
    pub fn file_name(self) -> &'static str {
        match self {
            FeatureEncoding::Csv => FEATURES_CSV,
            FeatureEncoding::F32 => FEATURES_F32,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub meta: DatasetMeta,
    pub graph: SparseGraph,
    pub features: FeatureMatrix,
    pub labels: LabelVector,
    pub splits: Option<SplitSet>,
}

fn dataset_error(path: &Path, msg: impl Into<String>) -> AmlpError {
    AmlpError::Dataset {
        path: path.to_path_buf(),
        msg: msg.into(),
    }
}

/// Parses `u v` pairs separated by tabs, spaces or commas. With `n_nodes`
/// given, out-of-range endpoints are reported against their line.
pub fn read_edge_list(path: &Path, n_nodes: Option<usize>) -> Result<Vec<(usize, usize)>> {
    let text = read_text(path)?;
    let mut edges = Vec::new();
    for (line_no, line) in data_lines(&text) {
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() != 2 {
            return Err(parse_error(path, line_no, format!("expected 2 fields, found {}", fields.len())));
        }
        let mut ends = [0usize; 2];
        for (slot, f) in ends.iter_mut().zip(&fields) {
            *slot = f
                .parse()
                .map_err(|_| parse_error(path, line_no, format!("'{f}' is not a node index")))?;
        }
        if let Some(n) = n_nodes {
            if ends[0] >= n || ends[1] >= n {
                return Err(parse_error(
                    path,
                    line_no,
                    format!("edge ({}, {}) out of range for {n} nodes", ends[0], ends[1]),
                ));
            }
        }
        edges.push((ends[0], ends[1]));
    }
    Ok(edges)
}

/// One integer per line; `-1` marks an unlabeled node.
pub fn read_labels(path: &Path) -> Result<Vec<i64>> {
    let text = read_text(path)?;
    data_lines(&text)
        .map(|(line_no, line)| {
            let v: i64 = line
                .parse()
                .map_err(|_| parse_error(path, line_no, format!("'{line}' is not an integer label")))?;
            if v < LabelVector::UNLABELED {
                return Err(parse_error(path, line_no, format!("label {v} is below -1")));
            }
            Ok(v)
        })
        .collect()
}

pub fn write_edges(path: &Path, g: &SparseGraph) -> Result<()> {
    let mut out = String::with_capacity(g.n_edges() * 10);
    for (u, v) in g.edges() {
        out.push_str(&format!("{u}\t{v}\n"));
    }
    write_text(path, &out)
}

pub fn write_labels(path: &Path, labels: &LabelVector) -> Result<()> {
    let mut out = String::with_capacity(labels.len() * 3);
    for v in labels.as_slice() {
        out.push_str(&format!("{v}\n"));
    }
    write_text(path, &out)
}

pub fn write_features_f32(path: &Path, x: &FeatureMatrix) -> Result<()> {
    let mut bytes = Vec::with_capacity(4 * x.as_array().len());
    for &v in x.as_array().iter() {
        bytes.extend_from_slice(&(v as f32).to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| AmlpError::io(path, e))
}

pub fn read_features_f32(path: &Path, n_rows: usize, n_cols: usize) -> Result<Array2<f64>> {
    let bytes = fs::read(path).map_err(|e| AmlpError::io(path, e))?;
    if bytes.len() != 4 * n_rows * n_cols {
        return Err(dataset_error(
            path,
            format!("expected {} bytes for {n_rows}x{n_cols} f32 values, found {}", 4 * n_rows * n_cols, bytes.len()),
        ));
    }
    let values = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    Ok(Array2::from_shape_vec((n_rows, n_cols), values).expect("length checked"))
}

pub fn read_meta(dir: &Path) -> Result<DatasetMeta> {
    let path = dir.join(META_FILE);
    serde_json::from_str(&read_text(&path)?).map_err(|e| dataset_error(&path, e.to_string()))
}

/// Reads and cross-checks every file of the dataset directory `dir`.
pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let meta = read_meta(dir)?;
    let n = meta.num_nodes;

    let edges_path = dir.join(EDGES_FILE);
    let graph = SparseGraph::from_edges(&read_edge_list(&edges_path, Some(n))?, n)?;

    let features_path = dir.join(&meta.features_file);
    let features = match meta.features_file.as_str() {
        FEATURES_CSV => read_matrix_csv(&features_path)?,
        FEATURES_F32 => read_features_f32(&features_path, n, meta.num_features)?,
        other => {
            return Err(dataset_error(
                &dir.join(META_FILE),
                format!("unknown features_file '{other}' (expected {FEATURES_CSV} or {FEATURES_F32})"),
            ))
        }
    };
    if features.dim() != (n, meta.num_features) && !(n == 0 && features.is_empty()) {
        return Err(dataset_error(
            &features_path,
            format!(
                "expected {n}x{} features, found {}x{}",
                meta.num_features,
                features.nrows(),
                features.ncols()
            ),
        ));
    }
    let features = FeatureMatrix::new(features)?;

    let labels_path = dir.join(LABELS_FILE);
    let labels = read_labels(&labels_path)?;
    if labels.len() != n {
        return Err(dataset_error(
            &labels_path,
            format!("expected {n} labels, found {}", labels.len()),
        ));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= meta.num_classes as i64) {
        return Err(dataset_error(
            &labels_path,
            format!("label {bad} exceeds num_classes = {}", meta.num_classes),
        ));
    }
    let labels = LabelVector::new(labels)?;

    let splits_path = dir.join(SPLITS_FILE);
    let splits = if splits_path.exists() {
        let set: SplitSet = serde_json::from_str(&read_text(&splits_path)?)
            .map_err(|e| dataset_error(&splits_path, e.to_string()))?;
        set.validate(&labels)
            .map_err(|e| dataset_error(&splits_path, e.to_string()))?;
        Some(set)
    } else {
        None
    };

    Ok(Dataset {
        meta,
        graph,
        features,
        labels,
        splits,
    })
}

/// Writes `meta.json`, `edges.tsv`, the features file and `labels.csv`.
/// `num_classes` is taken from the labels.
pub fn save_dataset(
    dir: &Path,
    name: &str,
    graph: &SparseGraph,
    x: &FeatureMatrix,
    labels: &LabelVector,
    encoding: FeatureEncoding,
) -> Result<DatasetMeta> {
    let n = graph.n_nodes();
    if x.n_rows() != n {
        return Err(AmlpError::shape("save_dataset features", n, x.n_rows()));
    }
    if labels.len() != n {
        return Err(AmlpError::shape("save_dataset labels", n, labels.len()));
    }
    fs::create_dir_all(dir).map_err(|e| AmlpError::io(dir, e))?;
    let meta = DatasetMeta {
        name: name.to_string(),
        num_nodes: n,
        num_features: x.n_cols(),
        num_classes: labels.n_classes(),
        features_file: encoding.file_name().to_string(),
    };
    write_edges(&dir.join(EDGES_FILE), graph)?;
    match encoding {
        FeatureEncoding::Csv => write_matrix_csv(&dir.join(FEATURES_CSV), x.as_array())?,
        FeatureEncoding::F32 => write_features_f32(&dir.join(FEATURES_F32), x)?,
    }
    write_labels(&dir.join(LABELS_FILE), labels)?;
    write_json(&dir.join(META_FILE), &meta)?;
    Ok(meta)
}

pub fn save_splits(dir: &Path, splits: &SplitSet) -> Result<PathBuf> {
    let path = dir.join(SPLITS_FILE);
    write_json(&path, splits)?;
    Ok(path)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}
