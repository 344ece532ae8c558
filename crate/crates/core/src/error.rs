use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid triplet: {0}")]
    InvalidTriplet(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("unsupported measure: {0}")]
    UnsupportedMeasure(String),
    #[error("quadrature failed on [{a}, {b}]: estimated error {error:e} above tolerance")]
    QuadratureFailure { a: f64, b: f64, error: f64 },
    #[error("root isolation failed: {0}")]
    RootIsolationFailure(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("invalid directions: {0}")]
    InvalidDirections(String),
    #[error("infinite activity: {0}")]
    InfiniteActivity(String),
    #[error("invalid integrand: {0}")]
    InvalidIntegrand(String),
    #[error("inconsistent verdict: {0}")]
    InconsistentVerdict(String),
}

pub type Result<T> = std::result::Result<T, Error>;
