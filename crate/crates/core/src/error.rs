use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, AmlpError>;

#[derive(Debug, Error)]
pub enum AmlpError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch in {op}: expected {expected}, got {got}")]
    DimensionMismatch {
        op: &'static str,
        expected: String,
        got: String,
    },

    #[error("edge {index} ({u}, {v}) out of range for {n_nodes} nodes")]
    EdgeOutOfRange {
        index: usize,
        u: usize,
        v: usize,
        n_nodes: usize,
    },

    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{}: {msg}", path.display())]
    Dataset { path: PathBuf, msg: String },

    #[error("non-finite loss at epoch {epoch}: L_agg={l_agg}, L_rec={l_rec}")]
    NonFinite { epoch: usize, l_agg: f64, l_rec: f64 },

    #[error("{0}")]
    Config(String),

    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl AmlpError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        AmlpError::InvalidInput(msg.into())
    }

    pub(crate) fn shape(op: &'static str, expected: impl ToString, got: impl ToString) -> Self {
        AmlpError::DimensionMismatch {
            op,
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AmlpError::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the numerics rather than by the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, AmlpError::NonFinite { .. })
    }
}
