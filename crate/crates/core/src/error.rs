use thiserror::Error;

/// Errors surfaced by the estimators, the integrator and the experiment harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The adaptive integrator could not keep the local error within tolerance.
    #[error("step size underflow at t = {reached_t} (target t = {target_t})")]
    StepSizeUnderflow { reached_t: f64, target_t: f64 },

    /// The integrated state left the finite range.
    #[error("state became non-finite at t = {reached_t}")]
    NonFiniteState { reached_t: f64 },

    /// Local design matrix B(x) is numerically singular at the query point.
    #[error("singular local design: lambda_min = {lambda_min:e} (floor {floor:e})")]
    SingularDesign { lambda_min: f64, floor: f64 },

    /// Univariate interpolation nodes are not pairwise distinct.
    #[error("interpolation nodes are not pairwise distinct")]
    DuplicateNodes,

    /// A point set with zero diameter cannot be normalized.
    #[error("point set has zero diameter")]
    ZeroDiameter,

    /// Convex hull membership is only implemented for d <= 3 or simplex stencils.
    #[error("hull membership unsupported for d = {dim} with {points} points")]
    DimensionUnsupported { dim: usize, points: usize },

    /// No admissible interpolation stencil exists for the query point.
    #[error("no admissible stencil found ({examined} candidates examined)")]
    NoStencilFound { examined: usize },

    /// Rate fitting needs strictly positive errors.
    #[error("rate fitting requires positive errors, got {value} at index {index}")]
    NonPositiveError { index: usize, value: f64 },

    /// The requested theoretical rate has no closed form.
    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),

    /// Too many replicates failed at one sample size.
    #[error("experiment failed at n = {n}: {failed} of {total} replicates failed")]
    ExperimentFailed { n: usize, failed: usize, total: usize },

    /// Invalid arguments or configuration.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Unknown built-in vector field.
    #[error("unknown vector field '{0}'")]
    UnknownField(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
