//! Simulation and analysis of the delay difference equation
//!
//! ```text
//! x[n+1] = A + B * x[n-m] / x[n]^2,      A, B > 0, m >= 1
//! ```
//!
//! which the substitution `y = x / A` reduces to
//! `y[n+1] = 1 + p * y[n-m] / y[n]^2` with `p = B / A^2`.
//!
//! The crate iterates the equation, linearizes it about its positive
//! equilibrium, finds the characteristic roots, and checks orbits against
//! the known structural results: the comparison envelope, semi-cycle
//! lengths, absence of two-cycles, stability thresholds and the rate of
//! convergence.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod linearization;
pub mod model;
pub mod recurrence;
pub mod sweep;

pub use error::{Error, Result};
pub use model::{comparison_equilibrium, equilibrium, normalize, Equilibrium, NormalizedParameters, Parameters};
pub use recurrence::{InitialConditions, IterationGuard, Trajectory, TrajectoryStatus};
