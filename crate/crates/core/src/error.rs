use thiserror::Error;

/// Errors raised by the reconstruction library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("observation point x0 = {x0} lies inside the domain [0, {length}]")]
    ObservationPointInside { x0: f64, length: f64 },

    #[error("explicit scheme is unstable at cfl = {cfl} (requires cfl <= 1)")]
    CflViolation { cfl: f64 },

    #[error("non-finite value produced at time step {step}")]
    NonFinite { step: usize },

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("series too short: need at least {needed} samples, got {got}")]
    SeriesTooShort { needed: usize, got: usize },

    #[error("resampling target [{target_start}, {target_end}] exceeds source range [{source_start}, {source_end}]")]
    ResampleRange {
        source_start: f64,
        source_end: f64,
        target_start: f64,
        target_end: f64,
    },

    #[error("factorization failed at pivot {pivot} (value {value:e}); the quadratic form is not positive definite")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("linear solver did not converge: relative residual {residual:e} after {iterations} iterations")]
    SolverNotConverged { residual: f64, iterations: usize },

    #[error("initial displacement vanishes at node {node} and no positivity floor was given")]
    DegenerateInitialData { node: usize },

    #[error("divergence detected at iteration {iteration}: relative change grew from {from:e} to {to:e}")]
    Diverged { iteration: usize, from: f64, to: f64 },

    #[error("expression error in `{expr}`: {message}")]
    Expression { expr: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
