use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::recurrence::Trajectory;

pub const DEFAULT_PERIOD_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_MAX_PERIOD: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodReport {
    pub period: Option<usize>,
    pub tolerance: f64,
    /// Number of trailing values inspected.
    pub window: usize,
    /// `max |y[n+k] - y[n]|` over the window for the reported period.
    pub discrepancy: Option<f64>,
}

/// Smallest shift `k <= max_period` under which the last `4 * max_period`
/// values repeat to within `tol`.
pub fn detect_period(traj: &Trajectory, max_period: usize, tol: f64) -> Result<PeriodReport> {
    traj.require_completed()?;
    detect_period_in(&traj.values, max_period, tol)
}

pub fn detect_period_in(values: &[f64], max_period: usize, tol: f64) -> Result<PeriodReport> {
    if max_period == 0 {
        return Err(Error::InvalidParameter("max_period must be at least 1".into()));
    }
    let window = 4 * max_period;
    if values.len() < window {
        return Err(Error::WindowTooShort {
            needed: window,
            available: values.len(),
        });
    }
    let tail = &values[values.len() - window..];
    for k in 1..=max_period {
        let discrepancy = tail
            .iter()
            .zip(&tail[k..])
            .map(|(a, b)| (b - a).abs())
            .fold(0.0, f64::max);
        if discrepancy <= tol {
            return Ok(PeriodReport {
                period: Some(k),
                tolerance: tol,
                window,
                discrepancy: Some(discrepancy),
            });
        }
    }
    Ok(PeriodReport {
        period: None,
        tolerance: tol,
        window,
        discrepancy: None,
    })
}
