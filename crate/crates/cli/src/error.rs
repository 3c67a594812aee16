use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("table has {expected} columns but row {row} has {got}")]
    Ragged { row: usize, expected: usize, got: usize },

    #[error(transparent)]
    Simulation(#[from] spectrwm::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;
