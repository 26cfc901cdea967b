use thiserror::Error;

/// Errors raised by the solver and its diagnostics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("coefficient `{0}` must be positive")]
    PositivityViolation(&'static str),
    #[error("coupled coefficients are inconsistent with epsilon times the base coefficients")]
    CouplingInconsistency,
    #[error("strict analysis mode requires kappa = 0 (got {0})")]
    StrictModeKappaNonzero(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("spectrum violates Hermitian symmetry (defect {0:.3e})")]
    SymmetryViolation(f64),
    #[error("non-finite coefficient at step {step} (t = {time})")]
    NonFinite { step: usize, time: f64 },
    #[error("a priori bound violated at t = {time}: lhs {lhs:.6e} exceeds rhs {rhs:.6e}")]
    AprioriViolation { time: f64, lhs: f64, rhs: f64 },
    #[error("time grids do not match: {0}")]
    TimeGridMismatch(String),
    #[error("galerkin basis cutoff {cutoff} exceeds the grid limit {limit}")]
    CutoffTooLarge { cutoff: usize, limit: usize },
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
}

pub type Result<T> = std::result::Result<T, Error>;
