//! Error types shared across the crate.

use crate::expr::{EvalError, ParseError};
use crate::metric::Point;

/// Errors raised by contracta operations.
///
/// Mathematical negatives (a violated inequality, a diverging iteration) are
/// never errors; they are carried as data in verdicts and reports.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Caller supplied inconsistent arguments (dimension mismatch, bad parameter).
    #[error("usage error: {0}")]
    Usage(String),

    /// A point has a non-finite coordinate or lies outside the space's domain.
    #[error("domain error: {reason} at {point}")]
    Domain { point: Point, reason: String },

    /// The map sent an in-domain point outside the domain (or to a non-finite value).
    #[error("self-map violation: T({input}) = {output} leaves the domain")]
    SelfMapViolation { input: Point, output: Point },

    /// No pair of the sampled region can have a distance in the requested band.
    #[error("infeasible band [{epsilon}, {epsilon} + {width}) for sampled diameter {diameter}")]
    InfeasibleBand {
        epsilon: f64,
        width: f64,
        diameter: f64,
    },

    /// A Meir-Keeler modulus produced a non-positive or non-finite delta.
    #[error("invalid modulus: delta({epsilon}) = {delta}")]
    InvalidModulus { epsilon: f64, delta: f64 },

    /// A certificate expression could not be evaluated to a finite value.
    #[error("certificate evaluation failed: {0}")]
    CertificateEval(EvalError),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),
}

pub type Result<T> = std::result::Result<T, Error>;
