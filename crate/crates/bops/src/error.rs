use std::path::PathBuf;

use thiserror::Error;

use crate::formats::FormatError;

#[derive(Debug, Error)]
pub enum BopsError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Format { path: PathBuf, source: FormatError },
    #[error(transparent)]
    Core(#[from] bops_core::Error),
    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("writing JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

impl BopsError {
    /// 2 for invalid requests, 1 for everything that went wrong while running one.
    pub fn exit_code(&self) -> i32 {
        match self {
            BopsError::Usage(_) => 2,
            _ => 1,
        }
    }
}
