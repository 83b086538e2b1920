use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("input is not Hermitian: residue {residue:.3e} exceeds {tolerance:.0e}")]
    NonHermitian { residue: f64, tolerance: f64 },

    #[error("not a valid state: {0}")]
    InvalidState(String),

    #[error("measurement outcome has vanishing probability ({probability:.3e})")]
    ZeroProbability { probability: f64 },

    #[error("integration failed to reach tolerance {tolerance:.1e}: estimated error {estimate:.3e}")]
    IntegrationFailure { estimate: f64, tolerance: f64 },

    #[error("grid error: {0}")]
    Grid(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("optimizer failed: {0}")]
    Optimizer(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the failure stems from bad input rather than a numerical breakdown.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidDimension { .. }
                | Error::Shape(_)
                | Error::NonHermitian { .. }
                | Error::InvalidState(_)
                | Error::Grid(_)
                | Error::Config(_)
                | Error::Json(_)
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
