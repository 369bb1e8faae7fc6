//! Convergence rate of `e[n] = y[n] - y_bar` against the characteristic roots.
//!
//! The deviation obeys `e[n+1] = p_n e[n] + q_n e[n-m]` exactly, with
//! `p_n = -p (y[n] + y_bar) / (y_bar y[n]^2)` and `q_n = p / y[n]^2`. As the
//! orbit converges the coefficients tend to the linearization, and
//! `|e[n]|^(1/n)` tends to the modulus of the dominant root.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linearization::RootSet;
use crate::recurrence::{DeviationTrajectory, Trajectory, DEVIATION_FLOOR};

/// Deviations computed as `y[n] - y_bar` are only meaningful above this.
pub const Y_FORM_FLOOR: f64 = 1e-13;

/// Fraction of the usable indices averaged for the ratio estimate.
const TAIL_FRACTION: f64 = 0.2;

/// `(p_n, q_n)` at `y[n]`.
#[inline]
pub fn error_recurrence_coeffs(y_n: f64, p: f64, y_bar: f64) -> (f64, f64) {
    let y_sq = y_n * y_n;
    (-p * (y_n + y_bar) / (y_bar * y_sq), p / y_sq)
}

/// `e[n+1] - p_n e[n] - q_n e[n-m]` for `n = 0..N-1`, with `e` taken from
/// the stored `y` values.
pub fn error_recurrence_residuals(traj: &Trajectory, y_bar: f64) -> Vec<f64> {
    let p = traj.params.p();
    let m = traj.params.m();
    let orbit = traj.full_orbit();
    (m..orbit.len() - 1)
        .map(|k| {
            let (p_n, q_n) = error_recurrence_coeffs(orbit[k], p, y_bar);
            let e_next = orbit[k + 1] - y_bar;
            e_next - p_n * (orbit[k] - y_bar) - q_n * (orbit[k - m] - y_bar)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRateReport {
    /// Mean of `|e[n+1]| / |e[n]|` over the last fifth of the usable indices.
    pub ratio_estimate: f64,
    /// `|e[N]|^(1/N)` at the last usable index `N`.
    pub nth_root_estimate: f64,
    pub dominant_modulus: f64,
    /// Dominant root is real and strictly larger in modulus than the rest,
    /// the case where the ratio estimate has a limit.
    pub dominant_real_simple: bool,
    pub last_usable_index: usize,
    pub tail_start: usize,
    pub floor: f64,
}

impl ConvergenceRateReport {
    pub fn nth_root_error(&self) -> f64 {
        (self.nth_root_estimate - self.dominant_modulus).abs()
    }

    pub fn ratio_error(&self) -> f64 {
        (self.ratio_estimate - self.dominant_modulus).abs()
    }
}

fn dominant_real_simple(roots: &RootSet) -> bool {
    match roots.roots.as_slice() {
        [] => false,
        [only] => only.im == 0.0,
        [first, second, ..] => first.im == 0.0 && first.norm() - second.norm() > 1e-9 * first.norm().max(1.0),
    }
}

/// Rate estimates from the deviations `e[1..=N]`, ignoring everything after
/// the last index with `|e| > floor`.
pub fn estimate_rate_in(deviations: &[f64], floor: f64, roots: &RootSet) -> Result<ConvergenceRateReport> {
    let last = deviations
        .iter()
        .rposition(|e| e.abs() > floor)
        .ok_or(Error::EquilibriumOrbit)?;
    let usable = &deviations[..=last];
    let len = usable.len();
    if len < 5 {
        return Err(Error::NotConverging);
    }

    let tail_len = ((len as f64 * TAIL_FRACTION).ceil() as usize).max(4);
    let tail_start = len - tail_len;
    let tail = &usable[tail_start..];
    let half = tail.len() / 2;
    let early = tail[..half].iter().fold(0.0_f64, |a, e| a.max(e.abs()));
    let late = tail[half..].iter().fold(0.0_f64, |a, e| a.max(e.abs()));
    if !(late < early) {
        return Err(Error::NotConverging);
    }

    let ratios: Vec<f64> = tail
        .windows(2)
        .filter(|w| w[0] != 0.0)
        .map(|w| (w[1] / w[0]).abs())
        .collect();
    let ratio_estimate = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let n = len as f64;
    let nth_root_estimate = usable[last].abs().powf(1.0 / n);

    Ok(ConvergenceRateReport {
        ratio_estimate,
        nth_root_estimate,
        dominant_modulus: roots.spectral_radius,
        dominant_real_simple: dominant_real_simple(roots),
        last_usable_index: len,
        tail_start: tail_start + 1,
        floor,
    })
}

/// Rate from a stored `y` orbit. Deviations below [`Y_FORM_FLOOR`] are
/// dominated by rounding and are discarded.
pub fn estimate_rate(traj: &Trajectory, y_bar: f64, roots: &RootSet) -> Result<ConvergenceRateReport> {
    traj.require_completed()?;
    estimate_rate_in(&traj.deviations(y_bar), Y_FORM_FLOOR, roots)
}

/// Rate from a deviation orbit, which stays resolved down to
/// [`DEVIATION_FLOOR`].
pub fn estimate_rate_deviations(orbit: &DeviationTrajectory, roots: &RootSet) -> Result<ConvergenceRateReport> {
    if orbit.status.is_guard_trip() {
        return Err(Error::Incomplete(orbit.status));
    }
    estimate_rate_in(&orbit.values, DEVIATION_FLOOR, roots)
}
