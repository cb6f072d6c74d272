//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("fractional order s = {0} outside (0, 2]")]
    FractionalOrder(f64),

    #[error("analytic background handling requires s = 1 (got s = {0})")]
    BackgroundOrder(f64),

    #[error("operation requires dimension {required}, field has dimension {actual}")]
    Dimension { required: usize, actual: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("rescale factor {lambda} under-covers the target box, coverage fraction {coverage:.3}")]
    Coverage { lambda: f64, coverage: f64 },

    #[error("CFL violated: dt = {dt}, limit = {limit}")]
    Cfl { dt: f64, limit: f64 },

    #[error("NaN detected at step {step} (t = {t})")]
    Nan { step: usize, t: f64 },

    #[error("steady state not reached by s = {s_max}; residual history tail: {tail:?}")]
    NoSteadyState { s_max: f64, tail: Vec<f64> },

    #[error("tail fit refused: {0}")]
    TailFit(String),

    #[error("bump width {width} under-resolved (need at least 4 dx = {min})")]
    UnderResolved { width: f64, min: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("snapshot format error: {0}")]
    Snapshot(String),

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
