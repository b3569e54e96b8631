use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = SimError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("cannot parse {path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error(transparent)]
    Core(#[from] ceo_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Numerical(String),
    #[error("acceptance threshold violated: {0}")]
    Threshold(String),
    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const FAILURE: u8 = 1;
    pub const INVALID_CONFIG: u8 = 2;
    pub const ESTIMATOR_PRECONDITION: u8 = 3;
    pub const THRESHOLD: u8 = 4;
}

impl SimError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> u8 {
        use ceo_core::Error as E;
        match self {
            Self::Config(_) | Self::Parse { .. } => exit::INVALID_CONFIG,
            Self::Core(E::EvenAgentCount(_) | E::EstimatorPrecondition(_)) => exit::ESTIMATOR_PRECONDITION,
            Self::Core(E::InvalidParameter { .. } | E::NotComposable(_) | E::RegularityMismatch(_)) => {
                exit::INVALID_CONFIG
            }
            Self::Threshold(_) => exit::THRESHOLD,
            _ => exit::FAILURE,
        }
    }
}
