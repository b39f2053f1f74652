use thiserror::Error;

/// Errors raised by the time-scale engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("time scale needs at least one component")]
    EmptyScale,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("interval [{lo}, {hi}] must satisfy lo < hi")]
    InvalidInterval { lo: String, hi: String },

    #[error("point {point} is not on the time scale")]
    NotInScale { point: String },

    #[error("quadrature on [{lo}, {hi}] did not reach tolerance {tolerance:e}")]
    QuadratureDidNotConverge { lo: String, hi: String, tolerance: f64 },

    #[error("exact regime cannot {0}")]
    NotExact(String),

    #[error("monotonicity violated between t={left} and t={right}")]
    MonotonicityViolation { left: String, right: String },

    #[error("discontinuity detected near t={near}")]
    DiscontinuityDetected { near: String },

    #[error("{0} is outside the function's image")]
    NotInImage(String),

    #[error("invalid piecewise definition: {0}")]
    InvalidPiecewise(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot parse number {0:?}")]
    ParseNumber(String),

    #[error("function evaluation failed: {0}")]
    Evaluation(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
