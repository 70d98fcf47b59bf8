//! Model checkpoints: `checkpoint.json` holding `{d, c, config, seed,
//! weights_file}` next to a CSV of W with d rows and c columns.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::dataset::write_json;
use super::format::{read_matrix_csv, read_text, write_matrix_csv};
use crate::error::{AmlpError, Result};
use crate::model::{AmlpConfig, AmlpModel};

pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const WEIGHTS_FILE: &str = "weights.csv";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointHeader {
    pub d: usize,
    pub c: usize,
    pub config: AmlpConfig,
    pub seed: u64,
    pub weights_file: String,
}

pub fn save_checkpoint(dir: &Path, model: &AmlpModel) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| AmlpError::io(dir, e))?;
    let (d, c) = model.weights.dim();
    let header = CheckpointHeader {
        d,
        c,
        config: model.config.clone(),
        seed: model.config.seed,
        weights_file: WEIGHTS_FILE.to_string(),
    };
    write_matrix_csv(&dir.join(WEIGHTS_FILE), &model.weights)?;
    write_json(&dir.join(CHECKPOINT_FILE), &header)
}

pub fn load_checkpoint(dir: &Path) -> Result<AmlpModel> {
    let path = dir.join(CHECKPOINT_FILE);
    let header: CheckpointHeader = serde_json::from_str(&read_text(&path)?).map_err(|e| AmlpError::Dataset {
        path: path.clone(),
        msg: e.to_string(),
    })?;
    let weights = read_matrix_csv(&dir.join(&header.weights_file))?;
    if weights.dim() != (header.d, header.c) {
        return Err(AmlpError::shape(
            "load_checkpoint",
            format!("{}x{}", header.d, header.c),
            format!("{}x{}", weights.nrows(), weights.ncols()),
        ));
    }
    Ok(AmlpModel {
        weights,
        config: header.config,
    })
}
