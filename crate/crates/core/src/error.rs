use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    /// No admissible path joins the two points, so the value function is `+inf`.
    #[error("no admissible path from the start point to the end point")]
    NoAdmissiblePath,

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("negative kernel value {value:e} exceeds the error estimate {est_error:e}")]
    NegativeDensity { value: f64, est_error: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("degenerate samples: {0}")]
    DegenerateSamples(String),

    #[error("simulation failed: {0}")]
    Simulation(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
