use alloc::boxed::Box;
use alloc::string::String;

use crate::fields::Field;
use crate::state::FieldQuad;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("fields live on different domains")]
    DomainMismatch,
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value at cell {index}")]
    NonFinite { index: usize },
    #[error("invalid initial data: {field} has value {value} at cell {index}")]
    InvalidInitialData { field: Field, index: usize, value: f64 },
    #[error("invalid exponent p = {0} (need p >= 1 or p = inf)")]
    InvalidExponent(f64),
    #[error("linear solve failed: residual {residual:e} exceeds {tolerance:e}")]
    LinearSolve { residual: f64, tolerance: f64 },
    #[error("numerical failure at t = {time}: {reason}")]
    NumericalFailure {
        time: f64,
        reason: String,
        last_good: Box<FieldQuad>,
    },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("degenerate data: mean of u0 is {0}, rate bounds are vacuous")]
    DegenerateData(f64),
    #[error("invalid smoothing estimate: {0}")]
    InvalidKind(String),
    #[error("test field must have zero mean for this estimate (mean = {0:e})")]
    NotMeanZero(f64),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("constant A is only defined for lambda1 < ubar0/2 (lambda1 = {lambda1}, ubar0 = {ubar0})")]
    WrongBranch { lambda1: f64, ubar0: f64 },
    #[error("need at least 3 usable samples, got {usable}")]
    InsufficientData { usable: usize },
    #[error("smallness conditions apply for n >= 4, got n = {0}")]
    OutOfRegime(usize),
    #[error("quadrature did not converge on [{a}, {b}] (error estimate {error:e})")]
    Quadrature { a: f64, b: f64, error: f64 },
    #[error("internal error: {0}")]
    Internal(String),
}
