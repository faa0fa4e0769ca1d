use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("signature error: {0}")]
    Signature(String),
    #[error("degenerate pairing: {0}")]
    Degenerate(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("missing grading: {0}")]
    MissingGrading(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parity error: {0}")]
    Parity(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("singular jacobian at iteration {0}")]
    SingularJacobian(usize),
    #[error("newton did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
