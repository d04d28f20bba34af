use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("no sign change of F on [1/2, 1]: F(1/2) = {lo:e}, F(1) = {hi:e}")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("singular preconditioner: min |eigenvalue| {min:e} vs max {max:e}")]
    SingularPreconditioner { min: f64, max: f64 },

    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("Krylov breakdown at iteration {iteration}: p'Ap = {curvature:e}")]
    Breakdown { iteration: usize, curvature: f64 },

    #[error("Krylov solver did not converge in {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("dense size {size} exceeds cap {cap}")]
    CapExceeded { size: usize, cap: usize },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-norm {off:e})")]
    JacobiNotConverged { sweeps: usize, off: f64 },

    #[error("linear solve failed at time step {step}: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown problem {name:?}; registered: {available}")]
    UnknownProblem { name: String, available: String },
}

pub type Result<T> = std::result::Result<T, Error>;
