use thiserror::Error;

/// Errors produced by the design library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error("point {x} lies outside the region [{lo}, {hi}]")]
    OutsideRegion { x: f64, lo: f64, hi: f64 },

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A matrix that has to be inverted is (numerically) singular.
    #[error("singular {matrix} (reciprocal condition number {rcond:.3e})")]
    SingularCriterion { matrix: String, rcond: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("solver failed: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, DesignError>;
