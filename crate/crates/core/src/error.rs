use crate::economy::EconomyError;
use crate::monitoring::MonitoringError;
use thiserror::Error;

/// Errors raised by the solvers, experiments, and simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Economy(#[from] EconomyError),
    #[error(transparent)]
    Monitoring(#[from] MonitoringError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("value iteration did not converge after {iterations} iterations (final gap {gap:e})")]
    NonConvergence { iterations: usize, gap: f64 },
    #[error("frontier is empty")]
    EmptyFrontier,
    #[error("value functions coincide; modulus is undefined")]
    DegeneratePair,
}

impl SolverError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        SolverError::InvalidInput(msg.into())
    }
}

pub type Result<T, E = SolverError> = std::result::Result<T, E>;
