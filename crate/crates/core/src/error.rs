use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("dimension {dim} exceeds limit {limit}")]
    DimensionOverflow { dim: usize, limit: usize },
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("outcome {outcome} has zero probability (p = {probability:e})")]
    ZeroProbability { outcome: usize, probability: f64 },
    #[error("vanishing overlap {0:e} with reference state")]
    VanishingOverlap(f64),
    #[error("degenerate bound: reference expectation of a local operator vanishes")]
    DegenerateBound,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("spectral gap {gap:e} below tolerance {tol:e}")]
    GapClosed { gap: f64, tol: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
