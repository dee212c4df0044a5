//! Crate-wide error type.

use thiserror::Error;

/// Reason an expression could not be evaluated at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("log of a non-positive value")]
    LogNonPositive,
    #[error("square root of a negative value")]
    SqrtNegative,
    #[error("result is not finite")]
    NonFinite,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("evaluation error at x = {x}: {reason}")]
    Eval { x: f64, reason: EvalError },

    #[error("field `{name}` must be strictly positive; found {value} at x = {x}")]
    NonPositiveField { name: String, x: f64, value: f64 },

    #[error("field `{name}` has a non-finite value at x = {x}")]
    NonFiniteField { name: String, x: f64 },

    #[error("fields are attached to different grids")]
    GridMismatch,

    #[error("zero field where a nonzero field is required")]
    ZeroField,

    #[error("normal equations are ill-conditioned: basis fields are nearly dependent")]
    NearlyDependent,

    #[error("invalid parameter `{name}`: {message}")]
    InvalidParam { name: &'static str, message: String },

    #[error("scenario key `{key}`: {message}")]
    Scenario { key: String, message: String },

    #[error("timestep too large: {detail}")]
    TimestepTooLarge { detail: String },

    #[error("tridiagonal solve broke down (zero pivot at row {row})")]
    SolveBreakdown { row: usize },

    #[error("not converged by t = {t}: stationary residual {residual:.3e}")]
    NotConverged { t: f64, residual: f64 },

    #[error("eigensolver did not converge within {iterations} iterations")]
    EigenNotConverged { iterations: usize },

    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
