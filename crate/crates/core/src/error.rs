//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("operator contract violated: {0}")]
    Contract(String),
    #[error("singular frame: {0}")]
    SingularFrame(String),
    #[error("unstable frame: {0}")]
    UnstableFrame(String),
    #[error("integration failure: {0}")]
    Integration(String),
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("steady state not unique (kernel dimension {0})")]
    NonUniqueSteadyState(usize),
    #[error("observable extraction failed: {0}")]
    Extraction(String),
    #[error("linear algebra backend: {0}")]
    Linalg(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
