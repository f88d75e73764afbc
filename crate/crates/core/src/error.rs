use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("period matrix is not symmetric (|Z_{row}{col} - Z_{col}{row}| = {residual:e})")]
    NotSymmetric { row: usize, col: usize, residual: f64 },

    #[error("imaginary part of the period matrix is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),

    #[error("imaginary part is too badly conditioned for certified evaluation (smallest eigenvalue {lambda_min:e} < {floor})")]
    IllConditioned { lambda_min: f64, floor: f64 },

    #[error("split form requires an even diagonal in X, found X[{index}][{index}] = {value}")]
    OddDiagonal { index: usize, value: i64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid polarization type {0:?}: {1}")]
    InvalidType(Vec<u64>, String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
