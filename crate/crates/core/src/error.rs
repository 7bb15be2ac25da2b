//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}x{expected}, got {got}x{got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("{what} constraint violated: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ConstraintViolation {
        what: &'static str,
        residual: f64,
        tol: f64,
    },

    #[error("coordinate shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("directions do not commute: |[X, Y]| = {bracket_norm:.3e}")]
    NonCommutingPair { bracket_norm: f64 },

    #[error("group drift {drift:.3e} exceeds tolerance {tol:.3e} at step {step} (t = {t})")]
    DriftExceeded {
        step: usize,
        t: f64,
        drift: f64,
        tol: f64,
    },

    #[error("derivatives unavailable: {0}")]
    DerivativesUnavailable(String),

    #[error("curve is not unit speed: |p'| ranges over [{min:.6}, {max:.6}]")]
    NonUnitSpeed { min: f64, max: f64 },

    #[error("curvature vanishes (kappa = {kappa:.3e} at s = {s}); torsion undefined")]
    VanishingCurvature { s: f64, kappa: f64 },

    #[error("unknown catalog case: {0}")]
    UnknownCase(String),

    #[error("too few samples: got {got}, need at least {need}")]
    TooFewSamples { got: usize, need: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
