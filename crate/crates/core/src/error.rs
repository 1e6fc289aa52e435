use thiserror::Error;

/// Errors raised by the geometric and statistical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("iteration did not converge after {iterations} iterations (last change {change:.3e})")]
    NonConvergence { iterations: usize, change: f64 },
    #[error("ball intersection is empty")]
    EmptyIntersection,
    #[error("two circles are tangent within tolerance; perturbation did not resolve it")]
    DegenerateTangency,
    #[error("least-squares system is ill conditioned (condition number {condition:.3e})")]
    IllConditioned { condition: f64 },
    #[error("rejection sampler stalled: acceptance rate below {rate:.1e}")]
    RejectionStall { rate: f64 },
    #[error("operation not supported for density family `{0}`")]
    UnsupportedTag(&'static str),
    #[error("operation not supported in dimension {dim}")]
    UnsupportedDimension { dim: usize },
    #[error("radius {radius} must exceed the maximum {max} of the spherical function")]
    RadiusTooSmall { radius: f64, max: f64 },
    #[error("directions lie in a closed hemisphere")]
    HemisphereViolation,
    #[error("halfspace configuration is unbounded")]
    UnboundedConfiguration,
    #[error("negative moment requested but a trial produced V_j = {value:.3e}")]
    NonIntegrable { value: f64 },
    #[error("direction of the zero vector is undefined")]
    ZeroVector,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{failed} of {total} trials failed, above the {limit} allowed")]
    TooManyFailures { failed: usize, total: usize, limit: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
