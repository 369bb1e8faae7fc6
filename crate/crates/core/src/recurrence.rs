//! Iteration of the normalized equation, its unnormalized form and the
//! linear comparison equation.

use serde::{Deserialize, Serialize};

use crate::analysis::error_recurrence_coeffs;
use crate::error::{Error, Result};
use crate::model::{check_delay, NormalizedParameters, Parameters};

/// Smallest deviation magnitude a [`DeviationTrajectory`] keeps. Below this the
/// deviation is heading into the subnormal range and its sign stops being
/// trustworthy.
pub const DEVIATION_FLOOR: f64 = 1e-280;

/// Initial segment `y[-m], y[-m+1], ..., y[0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialConditions {
    values: Vec<f64>,
}

impl InitialConditions {
    pub fn new(values: Vec<f64>, m: usize) -> Result<Self> {
        check_delay(m)?;
        if values.len() != m + 1 {
            return Err(Error::InvalidInitialConditions(format!(
                "expected {} values for delay m = {m}, got {}",
                m + 1,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidInitialConditions(format!(
                "initial values must be positive and finite, got {v}"
            )));
        }
        Ok(Self { values })
    }

    /// Every initial value set to `value`.
    pub fn constant(value: f64, m: usize) -> Result<Self> {
        Self::new(vec![value; m + 1], m)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn m(&self) -> usize {
        self.values.len() - 1
    }

    /// `y[k]` for `k` in `-m..=0`.
    pub fn get(&self, k: i64) -> Option<f64> {
        let offset = k + self.m() as i64;
        if (0..self.values.len() as i64).contains(&offset) && k <= 0 {
            Some(self.values[offset as usize])
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationGuard {
    pub max_steps: usize,
    pub overflow_bound: f64,
    pub underflow_bound: f64,
}

impl IterationGuard {
    pub fn new(max_steps: usize, overflow_bound: f64, underflow_bound: f64) -> Result<Self> {
        let guard = Self {
            max_steps,
            overflow_bound,
            underflow_bound,
        };
        guard.validate()?;
        Ok(guard)
    }

    pub fn with_steps(max_steps: usize) -> Self {
        Self {
            max_steps,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_steps == 0 {
            return Err(Error::InvalidGuard("max_steps must be at least 1".into()));
        }
        if !(self.underflow_bound > 0.0 && self.underflow_bound < 1.0 && self.overflow_bound > 1.0) {
            return Err(Error::InvalidGuard(format!(
                "need 0 < underflow_bound < 1 < overflow_bound, got {} and {}",
                self.underflow_bound, self.overflow_bound
            )));
        }
        Ok(())
    }

    fn check(&self, value: f64, step: usize) -> Option<TrajectoryStatus> {
        if !(value < self.overflow_bound) {
            Some(TrajectoryStatus::Overflowed { step })
        } else if value <= self.underflow_bound {
            Some(TrajectoryStatus::Underflowed { step })
        } else {
            None
        }
    }
}

impl Default for IterationGuard {
    fn default() -> Self {
        Self {
            max_steps: 1000,
            overflow_bound: 1e150,
            underflow_bound: 1e-150,
        }
    }
}

/// How an iteration ended. `step` is the 1-based index of the value that
/// would have left the guarded range; that value is not stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrajectoryStatus {
    Completed,
    Overflowed { step: usize },
    Underflowed { step: usize },
    /// Deviation orbits only: the deviation fell below [`DEVIATION_FLOOR`].
    Settled { step: usize },
}

impl TrajectoryStatus {
    pub fn is_guard_trip(&self) -> bool {
        matches!(self, Self::Overflowed { .. } | Self::Underflowed { .. })
    }
}

/// Orbit of the normalized equation. `values[k]` holds `y[k + 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: NormalizedParameters,
    pub initial: InitialConditions,
    pub values: Vec<f64>,
    pub status: TrajectoryStatus,
    pub guard: IterationGuard,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_completed(&self) -> bool {
        self.status == TrajectoryStatus::Completed
    }

    /// `y[n]` for any stored index, including the initial segment `n <= 0`.
    pub fn y(&self, n: i64) -> Option<f64> {
        if n <= 0 {
            self.initial.get(n)
        } else {
            self.values.get(n as usize - 1).copied()
        }
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }

    /// Initial segment followed by the computed values.
    pub fn full_orbit(&self) -> Vec<f64> {
        let mut out = self.initial.values().to_vec();
        out.extend_from_slice(&self.values);
        out
    }

    /// Computed deviations `y[n] - y_bar` for `n >= 1`.
    pub fn deviations(&self, y_bar: f64) -> Vec<f64> {
        self.values.iter().map(|y| y - y_bar).collect()
    }

    pub fn require_completed(&self) -> Result<()> {
        if self.is_completed() {
            Ok(())
        } else {
            Err(Error::Incomplete(self.status))
        }
    }
}

/// One step of the normalized map, `1 + p * y_lag / y_n^2`.
#[inline]
pub fn step(y_n: f64, y_lag: f64, p: f64) -> f64 {
    1.0 + p * y_lag / (y_n * y_n)
}

fn iterate<F>(
    initial: &[f64],
    m: usize,
    guard: &IterationGuard,
    mut next: F,
) -> (Vec<f64>, TrajectoryStatus)
where
    F: FnMut(f64, f64) -> f64,
{
    let mut history = Vec::with_capacity(initial.len() + guard.max_steps);
    history.extend_from_slice(initial);
    let mut status = TrajectoryStatus::Completed;
    for step_index in 1..=guard.max_steps {
        let current = history[history.len() - 1];
        let lagged = history[history.len() - 1 - m];
        if current <= guard.underflow_bound {
            status = TrajectoryStatus::Underflowed { step: step_index };
            break;
        }
        let value = next(current, lagged);
        if let Some(tripped) = guard.check(value, step_index) {
            status = tripped;
            break;
        }
        history.push(value);
    }
    history.drain(..initial.len());
    (history, status)
}

/// Iterate `y[n+1] = 1 + p * y[n-m] / y[n]^2` for up to `guard.max_steps`
/// steps. Guard trips are reported through the status, never as errors.
pub fn simulate(
    params: NormalizedParameters,
    init: &InitialConditions,
    guard: IterationGuard,
) -> Result<Trajectory> {
    check_init(init, params.m())?;
    guard.validate()?;
    let p = params.p();
    let (values, status) = iterate(init.values(), params.m(), &guard, |y, lag| step(y, lag, p));
    Ok(Trajectory {
        params,
        initial: init.clone(),
        values,
        status,
        guard,
    })
}

/// Orbit of `x[n+1] = A + B * x[n-m] / x[n]^2` in its own coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XTrajectory {
    pub params: Parameters,
    pub initial: InitialConditions,
    pub values: Vec<f64>,
    pub status: TrajectoryStatus,
    pub guard: IterationGuard,
}

impl XTrajectory {
    /// The same orbit expressed as `y = x / A`.
    pub fn to_normalized(&self) -> Result<Trajectory> {
        let a = self.params.a();
        let m = self.params.m();
        let initial = InitialConditions::new(self.initial.values().iter().map(|x| x / a).collect(), m)?;
        Ok(Trajectory {
            params: self.params.normalize(),
            initial,
            values: self.values.iter().map(|x| x / a).collect(),
            status: self.status,
            guard: self.guard,
        })
    }
}

pub fn simulate_x_form(
    params: Parameters,
    init_x: &InitialConditions,
    guard: IterationGuard,
) -> Result<XTrajectory> {
    check_init(init_x, params.m())?;
    guard.validate()?;
    let (a, b) = (params.a(), params.b());
    let (values, status) = iterate(init_x.values(), params.m(), &guard, |x, lag| a + b * lag / (x * x));
    Ok(XTrajectory {
        params,
        initial: init_x.clone(),
        values,
        status,
        guard,
    })
}

/// Iterate the linear comparison equation `u[n+1] = 1 + p * u[n-m]` for
/// `n_steps` steps from `init = (u[-m], ..., u[0])`. Returns `u[1..=n_steps]`.
pub fn comparison_simulate(p: f64, m: usize, init: &[f64], n_steps: usize) -> Result<Vec<f64>> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "comparison equation needs 0 < p < 1, got {p}"
        )));
    }
    check_delay(m)?;
    if init.len() != m + 1 {
        return Err(Error::InvalidInitialConditions(format!(
            "expected {} values, got {}",
            m + 1,
            init.len()
        )));
    }
    let mut history = init.to_vec();
    history.reserve(n_steps);
    for _ in 0..n_steps {
        let lagged = history[history.len() - 1 - m];
        history.push(1.0 + p * lagged);
    }
    history.drain(..=m);
    Ok(history)
}

/// Orbit tracked directly in deviation coordinates `e[n] = y[n] - y_bar`.
///
/// The update `e[n+1] = p_n * e[n] + q_n * e[n-m]` is an exact rewrite of the
/// normalized map, so unlike `y[n] - y_bar` computed by subtraction the
/// deviation keeps full relative precision as it decays. Iteration stops
/// once `|e|` falls below [`DEVIATION_FLOOR`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationTrajectory {
    pub params: NormalizedParameters,
    pub y_bar: f64,
    /// Deviations of the initial segment, `e[-m..=0]`.
    pub initial: Vec<f64>,
    /// `values[k]` holds `e[k + 1]`.
    pub values: Vec<f64>,
    pub status: TrajectoryStatus,
}

impl DeviationTrajectory {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `e[n]` for any stored index, including the initial segment.
    pub fn e(&self, n: i64) -> Option<f64> {
        let m = self.params.m() as i64;
        if n <= 0 {
            self.initial.get((n + m) as usize).copied().filter(|_| n >= -m)
        } else {
            self.values.get(n as usize - 1).copied()
        }
    }

    /// Reconstructed `y[n] = y_bar + e[n]` for `n >= 1`.
    pub fn y_values(&self) -> Vec<f64> {
        self.values.iter().map(|e| self.y_bar + e).collect()
    }
}

pub fn simulate_deviations(
    params: NormalizedParameters,
    init: &InitialConditions,
    guard: IterationGuard,
) -> Result<DeviationTrajectory> {
    check_init(init, params.m())?;
    guard.validate()?;
    let p = params.p();
    let m = params.m();
    let y_bar = params.equilibrium().y_bar;
    let initial: Vec<f64> = init.values().iter().map(|y| y - y_bar).collect();

    let mut history = initial.clone();
    history.reserve(guard.max_steps);
    let mut status = TrajectoryStatus::Completed;
    for step_index in 1..=guard.max_steps {
        let e_n = history[history.len() - 1];
        let e_lag = history[history.len() - 1 - m];
        let y_n = y_bar + e_n;
        if y_n <= guard.underflow_bound {
            status = TrajectoryStatus::Underflowed { step: step_index };
            break;
        }
        let (p_n, q_n) = error_recurrence_coeffs(y_n, p, y_bar);
        let next = p_n * e_n + q_n * e_lag;
        if let Some(tripped) = guard.check(y_bar + next, step_index) {
            status = tripped;
            break;
        }
        if next.abs() < DEVIATION_FLOOR {
            status = TrajectoryStatus::Settled { step: step_index };
            break;
        }
        history.push(next);
    }
    history.drain(..=m);
    Ok(DeviationTrajectory {
        params,
        y_bar,
        initial,
        values: history,
        status,
    })
}

fn check_init(init: &InitialConditions, m: usize) -> Result<()> {
    if init.m() != m {
        return Err(Error::InvalidInitialConditions(format!(
            "initial segment has {} values but the delay needs {}",
            init.values().len(),
            m + 1
        )));
    }
    Ok(())
}
