//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, QpbError>;

#[derive(Debug, Error)]
pub enum QpbError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("input state is not supported on the symmetric subspace (overlap {overlap:.6})")]
    NonSymmetricInput { overlap: f64 },

    #[error("requested measurement branch has probability {prob:.3e}, numerically zero")]
    ZeroProbabilityBranch { prob: f64 },

    #[error("malformed ensemble: {0}")]
    MalformedEnsemble(String),
}
