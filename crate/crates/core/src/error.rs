use thiserror::Error;

pub type Result<T, E = CfxError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CfxError {
    #[error("argument {value} outside the domain of {what}")]
    Domain { what: &'static str, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "cholesky factorisation failed (gram matrix not positive definite at jitter {jitter:e})"
    )]
    Cholesky { jitter: f64 },

    #[error("tridiagonal eigensolver did not converge for eigenvalue {index}")]
    EigenNoConvergence { index: usize },

    #[error("measure is not positive definite at order {order} (beta = {beta:e})")]
    NotPositiveDefinite { order: usize, beta: f64 },

    #[error("infeasible search region: {0}")]
    Infeasible(String),

    #[error("model evaluation failed: {0}")]
    Model(String),

    #[error("unknown category {value:?} in column {column:?}")]
    UnknownCategory { column: String, value: String },

    #[error("missing column {0:?}")]
    MissingColumn(String),

    #[error("non-numeric cell {value:?} in numeric column {column:?} (row {row})")]
    NonNumeric {
        column: String,
        row: usize,
        value: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
