use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid must be at least 2x2, got {rows}x{cols}")]
    GridTooSmall { rows: usize, cols: usize },

    #[error("expected {expected} values for a {rows}x{cols} grid, got {got}")]
    DataLength {
        rows: usize,
        cols: usize,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("coefficient field `{name}` has invalid value {value} at ({row}, {col})")]
    InvalidCoefficient {
        name: &'static str,
        row: usize,
        col: usize,
        value: f64,
    },

    #[error("non-positive center coefficient {value} at ({row}, {col})")]
    NonPositiveCenter { row: usize, col: usize, value: f64 },

    #[error("grid with {cells} cells exceeds the dense limit of {limit}")]
    GridTooLarge { cells: usize, limit: usize },

    #[error("dense system is singular or not positive definite")]
    Singular,

    #[error("conjugate gradient breakdown at iteration {iteration}: curvature {curvature}")]
    CgBreakdown { iteration: usize, curvature: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "energy increased at outer iteration {iteration}: {previous} -> {current} (allowed slack {slack})"
    )]
    EnergyIncrease {
        iteration: usize,
        previous: f64,
        current: f64,
        slack: f64,
    },

    #[error("need at least {needed} data points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("image format error: {0}")]
    Image(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
