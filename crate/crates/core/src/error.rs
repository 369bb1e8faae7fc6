use thiserror::Error;

use crate::recurrence::TrajectoryStatus;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid initial conditions: {0}")]
    InvalidInitialConditions(String),

    #[error("invalid iteration guard: {0}")]
    InvalidGuard(String),

    #[error("root finder did not converge after {iterations} iterations (max residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("initial conditions do not follow the interleaved pattern at y[{index}]")]
    PatternMismatch { index: i64 },

    #[error("tail window too short: need {needed} values, have {available}")]
    WindowTooShort { needed: usize, available: usize },

    #[error("singular linear system while solving for comparison constants")]
    SingularSystem,

    #[error("orbit sits on the equilibrium; convergence rate is undefined")]
    EquilibriumOrbit,

    #[error("orbit is not converging over the tail window")]
    NotConverging,

    #[error("trajectory did not complete: {0:?}")]
    Incomplete(TrajectoryStatus),
}
