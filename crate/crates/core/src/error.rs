use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("wavelength must be positive, got {0}")]
    InvalidWavelength(f64),
    #[error("path list is empty")]
    EmptyPaths,
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid antenna layout: {0}")]
    InvalidLayout(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("more users ({users}) than antennas ({antennas})")]
    TooManyUsers { users: usize, antennas: usize },
    #[error("Gram matrix is numerically singular (condition estimate {condition:e})")]
    SingularGram { condition: f64 },
    #[error("user index {index} out of range for {users} users")]
    UserIndex { index: usize, users: usize },
    #[error("finite-difference probes are degenerate on both sides of coordinate {0}")]
    NonFiniteGradient(usize),
    #[error("antennas {0} and {1} coincide")]
    CoincidentAntennas(usize, usize),
    #[error("line search found no acceptable step")]
    StepFailed,
    #[error("initial layout violates the constraints (worst violation {0:e})")]
    InfeasibleInit(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
