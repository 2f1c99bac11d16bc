use thiserror::Error;

/// Errors raised by the estimation, inference and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of a special function or kernel.
    #[error("domain error: {0}")]
    Domain(String),

    /// A row of the sample has (numerically) zero norm and no direction.
    #[error("row {row} is the zero vector; its direction is undefined")]
    ZeroVector { row: usize },

    /// Invalid configuration (bandwidths, grid constants, levels, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Sample too small or wrongly shaped.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// All jackknife pseudovalues coincide.
    #[error("degenerate sample: {0}")]
    Degenerate(String),

    /// A quantile level is absent from the table and cannot be interpolated.
    #[error("quantile table error: {0}")]
    Table(String),

    /// The covariance matrix is not positive definite.
    #[error("covariance matrix is not positive definite")]
    Factorization,

    /// The spherical product rule failed its refinement self-check.
    #[error("quadrature budget exceeded: {0}")]
    QuadratureBudget(String),

    /// Malformed textual input.
    #[error("parse error at row {row}, column {col}: {msg}")]
    Parse { row: usize, col: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
