use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported dimension {0}; only d = 1, 2, 3 are supported")]
    UnsupportedDimension(usize),
    #[error("spectral measure weight {0} is not strictly positive")]
    NonPositiveWeight(f64),
    #[error("direction has norm {0}, expected a unit vector")]
    NonUnitDirection(f64),
    #[error("spectral measure is not centrally symmetric (set `symmetrize` to average it with its reflection)")]
    AsymmetricMeasure,
    #[error("invalid measure description: {0}")]
    InvalidMeasure(String),
    #[error("unsupported parameters: {0}")]
    UnsupportedParameters(String),
    #[error("Mittag-Leffler argument z = {0} is positive; only z <= 0 is supported")]
    PositiveArgument(f64),
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("grid too small: {0}")]
    GridTooSmall(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergent(String),
    #[error("Picard iteration did not converge after {iterations} iterations (last residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("parameter gate failed: {0}")]
    GateFailed(String),
    #[error("insufficient points for a fit: need at least {needed}, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("malformed data: {0}")]
    Parse(String),
    #[error("I/O failure: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
