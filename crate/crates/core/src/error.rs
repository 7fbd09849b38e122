use thiserror::Error;

/// Errors produced by the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value in input")]
    NonFinite,

    #[error("aliasing risk: {0}")]
    AliasingRisk(String),

    #[error("scale {y:e} is below the admissible minimum {y_min:e}")]
    ScaleOutOfRange { y: f64, y_min: f64 },

    #[error("moment quadrature inaccurate: tail mass {tail:e} exceeds tolerance {tolerance:e}")]
    QuadratureInaccurate { tail: f64, tolerance: f64 },

    #[error("degenerate profile: {0}")]
    DegenerateProfile(String),

    #[error("invalid LP pair: {0}")]
    InvalidPair(String),

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("grid size {0} is not a power of two")]
    NonPowerOfTwo(usize),

    #[error("format error at {location}: {message}")]
    Format { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
