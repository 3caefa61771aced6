use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("measure file line {line}: {reason}")]
    MeasureParse { line: usize, reason: String },

    #[error("step size underflow at r = {radius:e} (h = {step:e})")]
    StepUnderflow { radius: f64, step: f64 },

    #[error("non-finite state at r = {radius:e}: eta = {eta}, r*eta' = {flux}")]
    NonFinite { radius: f64, eta: f64, flux: f64 },

    #[error("radius {radius:e} outside profile range [0, {r_max:e}]")]
    OutOfRange { radius: f64, r_max: f64 },

    #[error("decay exponent not converged: relative variation {variation:e} over the final decade")]
    BetaNotConverged { variation: f64 },

    #[error("alpha = {alpha} must exceed the boundary constant {beta}")]
    AlphaBelowBoundary { alpha: f64, beta: f64 },

    #[error("profile too short: eta(r_max) = {eta_end} is still above the target {target}")]
    ProfileTooShort { eta_end: f64, target: f64 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("non-finite integrand in {0}")]
    NonFiniteIntegrand(&'static str),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::InvalidParameter {
        name,
        value,
        reason,
    }
}
