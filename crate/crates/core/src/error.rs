use thiserror::Error;

/// Errors produced by the covariance calculus, the distillation pipeline and
/// the dense reference implementation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not antisymmetric: residual {residual:.3e} exceeds {tolerance:.1e}")]
    NotAntisymmetric { residual: f64, tolerance: f64 },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not orthogonal: residual {residual:.3e}")]
    NotOrthogonal { residual: f64 },

    #[error("invalid covariance matrix: {0}")]
    InvalidCovariance(String),

    #[error("mode index {index} out of range for {modes} modes")]
    ModeOutOfRange { index: usize, modes: usize },

    #[error("mode {0} selected more than once")]
    DuplicateMode(usize),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("{what} too large: {size} exceeds limit {limit}")]
    TooLarge { what: &'static str, size: usize, limit: usize },

    #[error("inconsistent input: {0}")]
    Inconsistent(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
