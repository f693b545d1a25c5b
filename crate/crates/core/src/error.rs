use thiserror::Error;

/// Errors produced by the core numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("site index {index} out of range for {n_sites} sites")]
    SiteOutOfRange { index: usize, n_sites: usize },

    #[error("site subset must be nonempty and strictly increasing")]
    InvalidSubset,

    #[error("covariance matrix is not pure")]
    NotPure,

    #[error("orthogonal reduction did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("determinant is negative ({0:e}); input is not a valid sum of covariance matrices")]
    NegativeDeterminant(f64),

    #[error("unsupported for this model: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
