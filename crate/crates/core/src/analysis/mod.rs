//! Analyses of computed orbits: semi-cycles, periods, two-cycles, the
//! comparison envelope and the convergence rate.

mod envelope;
mod period;
mod rate;
mod semicycles;
mod two_cycle;

pub use envelope::{envelope, envelope_anchored, EnvelopeReport, EnvelopeViolation, ViolationKind};
pub use period::{detect_period, detect_period_in, PeriodReport, DEFAULT_MAX_PERIOD, DEFAULT_PERIOD_TOLERANCE};
pub use rate::{
    error_recurrence_coeffs, error_recurrence_residuals, estimate_rate, estimate_rate_deviations,
    estimate_rate_in, ConvergenceRateReport, Y_FORM_FLOOR,
};
pub use semicycles::{
    check_alternation, check_alternation_deviations, check_max_semicycle_length, decompose_deviations,
    decompose_semicycles, decompose_signs, SemiCycle, SemiCycleBoundCheck, SemiCycleDecomposition, Sign,
};
pub use two_cycle::{newton_two_cycle, two_cycle_analysis, NewtonOutcome, TwoCycleReport};
