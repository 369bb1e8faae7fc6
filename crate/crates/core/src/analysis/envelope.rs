//! Upper envelope from the linear comparison equation `u[n+1] = 1 + p u[n-m]`.
//!
//! For `0 < p < 1` and `y[n] >= 1` the map satisfies
//! `y[n+1] <= 1 + p y[n-m]`, so an orbit matched with `u` on `m + 1`
//! consecutive indices stays below it afterwards. The comparison orbit also
//! has the closed form `u[n] = 1/(1-p) + sum_j c_j lambda_j^n` with
//! `lambda_j = p^(1/(m+1)) exp(2 pi i (j-1)/(m+1))`; both are computed and
//! compared.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::comparison_equilibrium;
use crate::recurrence::{comparison_simulate, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    AboveEnvelope,
    NotAboveOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeViolation {
    pub index: i64,
    pub kind: ViolationKind,
    pub y: f64,
    pub u: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub p: f64,
    pub m: usize,
    /// First matched index `s`; `u` and `y` agree on `s..=s+m`.
    pub anchor: i64,
    /// `u[s], u[s+1], ..., u[N]` by iteration.
    pub u_iterative: Vec<f64>,
    /// Real part of the closed form at the same indices.
    pub u_closed_form: Vec<f64>,
    pub constants: Vec<Complex64>,
    pub roots: Vec<Complex64>,
    pub max_discrepancy: f64,
    pub max_imaginary: f64,
    pub violations: Vec<EnvelopeViolation>,
}

impl EnvelopeReport {
    /// `u[n]` by iteration, when `n` is covered.
    pub fn u(&self, n: i64) -> Option<f64> {
        usize::try_from(n - self.anchor).ok().and_then(|k| self.u_iterative.get(k).copied())
    }
}

/// Envelope matched on the initial segment when `y[0] >= 1`, otherwise on
/// `y[1-m..=1]`, the earliest window after which the majorant applies.
pub fn envelope(traj: &Trajectory) -> Result<EnvelopeReport> {
    let m = traj.params.m() as i64;
    let y0 = traj.y(0).expect("initial segment always holds y[0]");
    let anchor = if y0 >= 1.0 { -m } else { 1 - m };
    envelope_anchored(traj, anchor)
}

/// Envelope matched on `y[anchor..=anchor+m]`.
pub fn envelope_anchored(traj: &Trajectory, anchor: i64) -> Result<EnvelopeReport> {
    traj.require_completed()?;
    let p = traj.params.p();
    let m = traj.params.m();
    let u_bar = comparison_equilibrium(p)?;
    let n_last = traj.len() as i64;
    let window_end = anchor + m as i64;
    if anchor < -(m as i64) || window_end > n_last {
        return Err(Error::InvalidParameter(format!(
            "anchor {anchor} leaves the matched window outside y[{}..={n_last}]",
            -(m as i64)
        )));
    }

    let matched: Vec<f64> = (anchor..=window_end).map(|n| traj.y(n).unwrap()).collect();
    let steps = (n_last - window_end) as usize;
    let mut u_iterative = matched.clone();
    u_iterative.extend(comparison_simulate(p, m, &matched, steps)?);

    let order = m + 1;
    let modulus = p.powf(1.0 / order as f64);
    let roots: Vec<Complex64> = (0..order)
        .map(|j| Complex64::from_polar(modulus, 2.0 * std::f64::consts::PI * j as f64 / order as f64))
        .collect();
    // lambda_j^n with the angle reduced exactly before scaling
    let power = |j: usize, n: i64| -> Complex64 {
        let turns = (j as i64 * n).rem_euclid(order as i64);
        Complex64::from_polar(
            modulus.powf(n as f64),
            2.0 * std::f64::consts::PI * turns as f64 / order as f64,
        )
    };

    let system = DMatrix::from_fn(order, order, |i, j| power(j, anchor + i as i64));
    let rhs = DVector::from_iterator(order, matched.iter().map(|y| Complex64::new(y - u_bar, 0.0)));
    let constants = system.lu().solve(&rhs).ok_or(Error::SingularSystem)?;
    let constants: Vec<Complex64> = constants.iter().copied().collect();

    let mut u_closed_form = Vec::with_capacity(u_iterative.len());
    let mut max_imaginary: f64 = 0.0;
    for n in anchor..=n_last {
        let value = constants
            .iter()
            .enumerate()
            .fold(Complex64::new(u_bar, 0.0), |acc, (j, c)| acc + c * power(j, n));
        max_imaginary = max_imaginary.max(value.im.abs());
        u_closed_form.push(value.re);
    }
    let max_discrepancy = u_iterative
        .iter()
        .zip(&u_closed_form)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let mut violations = Vec::new();
    for n in 1..=n_last {
        let y = traj.y(n).unwrap();
        let u = usize::try_from(n - anchor).ok().map(|k| u_iterative[k]);
        if y <= 1.0 {
            violations.push(EnvelopeViolation { index: n, kind: ViolationKind::NotAboveOne, y, u });
        }
        if let Some(u) = u {
            if n > window_end && y > u {
                violations.push(EnvelopeViolation {
                    index: n,
                    kind: ViolationKind::AboveEnvelope,
                    y,
                    u: Some(u),
                });
            }
        }
    }

    Ok(EnvelopeReport {
        p,
        m,
        anchor,
        u_iterative,
        u_closed_form,
        constants,
        roots,
        max_discrepancy,
        max_imaginary,
        violations,
    })
}
