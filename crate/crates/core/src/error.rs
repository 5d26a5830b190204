use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("eigensolver did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("matrix is defective (eigenvector condition {condition:.3e})")]
    DefectiveMatrix { condition: f64 },
    #[error("integrator step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("invalid system specification: {0}")]
    InvalidSpec(String),
    #[error("dimension too large: {0}")]
    DimensionTooLarge(String),
    #[error("positivity violation: smallest eigenvalue {0:.3e}")]
    PositivityViolation(f64),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("no cube-root branch satisfies the characteristic polynomial (residual {residual:.3e})")]
    BranchFailure { residual: f64 },
    #[error("outside the domain of validity: {0}")]
    DomainError(String),
    #[error("sector labels could not be resolved: {0}")]
    SectorUnresolved(String),
    #[error("vanishing overlap: {0}")]
    ZeroOverlap(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("time grids differ")]
    GridMismatch,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("trace underflow at t = {t}")]
    NormalizationUnderflow { t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
