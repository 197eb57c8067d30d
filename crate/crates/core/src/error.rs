use thiserror::Error;

use crate::system::Family;

/// Errors produced by the engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A point lies outside the region where the Hamiltonian is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Division by zero or square root of a non-positive value during evaluation.
    #[error("singular evaluation: {0}")]
    Singular(&'static str),

    #[error("family mismatch: expected {expected}, got {found}")]
    FamilyMismatch { expected: Family, found: Family },

    /// Invalid coupling constants for the requested construction.
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("rejection sampling failed after {attempts} consecutive attempts")]
    Sampling { attempts: usize },

    #[error("implicit midpoint Newton iteration did not converge at t = {t}")]
    NewtonFailed { t: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
