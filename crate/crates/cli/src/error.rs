use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot access {0}: {1}")]
    Io(PathBuf, #[source] std::io::Error),

    #[error(transparent)]
    Engine(#[from] cone_minkowski::Error),

    #[error("cannot write table: {0}")]
    Csv(#[from] csv::Error),

    #[error("cannot serialise report: {0}")]
    Json(#[from] serde_json::Error),
}
