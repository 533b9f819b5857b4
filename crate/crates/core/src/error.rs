use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid topology: {0}")]
    Topology(String),

    #[error("weight matrix rejected: {0}")]
    WeightMatrix(String),

    #[error("non-finite input to {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("dataset: {0}")]
    Dataset(String),

    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("invariant violated at t={t}: {what} (deviation {deviation:e}, tolerance {tolerance:e})")]
    Invariant {
        t: usize,
        what: &'static str,
        deviation: f64,
        tolerance: f64,
    },

    #[error("iterate became non-finite at t={0}")]
    Diverged(usize),

    #[error("run `{name}` failed: {source}")]
    RunFailed {
        name: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for failures of the exact runtime identities (or divergence), which
    /// the CLI maps to exit code 2.
    pub fn is_runtime_violation(&self) -> bool {
        match self {
            Error::Invariant { .. } | Error::Diverged(_) => true,
            Error::RunFailed { source, .. } => source.is_runtime_violation(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
