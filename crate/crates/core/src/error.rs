use thiserror::Error;

/// Errors produced by the operator catalog, the integrators and the splitters.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: String,
    },

    /// A step/prox parameter violates the admissibility region of a scheme.
    /// The message names the bound that failed.
    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),

    #[error("invalid initial condition: {0}")]
    InvalidInitialCondition(String),

    #[error("dual vector is not a subgradient at the given point (prox identity off by {gap:e})")]
    InvalidDual { gap: f64 },

    #[error("operator is not cocoercive: {0}")]
    NotCocoercive(String),

    #[error("input is not a certified solution (residual {residual:e} > {tolerance:e})")]
    Uncertified { residual: f64, tolerance: f64 },

    #[error("oracle failed to certify a solution: residual {residual:e} after {iterations} iterations")]
    OracleFailure { residual: f64, iterations: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be a finite positive number".into(),
        })
    }
}
