//! Parameter sweeps over `(p, m)` and attractor summaries.
//!
//! Every trial draws its initial segment from its own ChaCha stream keyed by
//! `(seed, cell, trial)`, so grids are identical run to run regardless of
//! how the work is scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{detect_period_in, estimate_rate_deviations, DEFAULT_PERIOD_TOLERANCE};
use crate::error::{Error, Result};
use crate::linearization::{characteristic_polynomial, find_roots, linearize};
use crate::model::{check_delay, check_p, NormalizedParameters};
use crate::recurrence::{simulate, simulate_deviations, InitialConditions, IterationGuard, TrajectoryStatus};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub p_min: f64,
    pub p_max: f64,
    pub p_steps: usize,
    pub m_values: Vec<usize>,
    pub trials: usize,
    pub init_low: f64,
    pub init_high: f64,
    pub seed: u64,
    pub steps: usize,
    pub tol: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            p_min: 0.05,
            p_max: 0.45,
            p_steps: 9,
            m_values: vec![1, 2, 3],
            trials: 50,
            init_low: 0.5,
            init_high: 5.0,
            seed: 0,
            steps: 5000,
            tol: 1e-6,
        }
    }
}

impl SweepConfig {
    /// `p = 0.50, 0.55, ..., 0.70` for `m = 1, 2, 3`, 50 trials of 20000 steps.
    pub fn conjecture(seed: u64) -> Self {
        Self {
            p_min: 0.5,
            p_max: 0.7,
            p_steps: 5,
            steps: 20_000,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_p(self.p_min)?;
        check_p(self.p_max)?;
        if self.p_max < self.p_min {
            return Err(Error::InvalidParameter("p_max must not be below p_min".into()));
        }
        if self.p_steps == 0 || self.trials == 0 || self.steps == 0 {
            return Err(Error::InvalidParameter("p_steps, trials and steps must be at least 1".into()));
        }
        if self.m_values.is_empty() {
            return Err(Error::InvalidParameter("m_values must not be empty".into()));
        }
        for &m in &self.m_values {
            check_delay(m)?;
        }
        if !(self.init_low > 0.0 && self.init_high > self.init_low && self.init_high.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "init range needs 0 < low < high, got [{}, {}]",
                self.init_low, self.init_high
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter("tol must be positive".into()));
        }
        Ok(())
    }

    /// Evenly spaced grid including both ends.
    pub fn p_grid(&self) -> Vec<f64> {
        if self.p_steps == 1 {
            return vec![self.p_min];
        }
        let span = self.p_max - self.p_min;
        (0..self.p_steps)
            .map(|k| self.p_min + span * k as f64 / (self.p_steps - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialOutcome {
    Converged,
    Diverged,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub p: f64,
    pub m: usize,
    pub n_converged: usize,
    pub n_diverged: usize,
    pub n_undetermined: usize,
    /// Median `|y[N] - y_bar|` over trials that did not trip the guard.
    pub median_err: Option<f64>,
    /// Median `|e[n]|^(1/n)` over converged trials with a defined rate.
    pub median_rate: Option<f64>,
}

impl SweepCell {
    pub fn trials(&self) -> usize {
        self.n_converged + self.n_diverged + self.n_undetermined
    }
}

struct TrialResult {
    outcome: TrialOutcome,
    final_err: Option<f64>,
    rate: Option<f64>,
}

/// RNG for one trial. The stream id packs the cell and trial indices.
pub fn trial_rng(seed: u64, cell: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((cell as u64) << 32) | (trial as u64 & 0xffff_ffff));
    rng
}

fn run_trial(cfg: &SweepConfig, params: NormalizedParameters, y_bar: f64, cell: usize, trial: usize) -> TrialResult {
    let mut rng = trial_rng(cfg.seed, cell, trial);
    let values: Vec<f64> = (0..params.order()).map(|_| rng.gen_range(cfg.init_low..cfg.init_high)).collect();
    let init = InitialConditions::new(values, params.m()).expect("sampled initial values are positive");
    let guard = IterationGuard::with_steps(cfg.steps);
    let traj = simulate(params, &init, guard).expect("validated inputs");
    if traj.status.is_guard_trip() {
        return TrialResult {
            outcome: TrialOutcome::Diverged,
            final_err: None,
            rate: None,
        };
    }
    let err = (traj.last().unwrap_or(y_bar) - y_bar).abs();
    if err > cfg.tol {
        return TrialResult {
            outcome: TrialOutcome::Undetermined,
            final_err: Some(err),
            rate: None,
        };
    }
    let rate = find_roots(&characteristic_polynomial(&linearize(params.p(), params.m()).expect("validated")))
        .ok()
        .and_then(|roots| {
            let orbit = simulate_deviations(params, &init, guard).ok()?;
            estimate_rate_deviations(&orbit, &roots).ok()
        })
        .map(|r| r.nth_root_estimate);
    TrialResult {
        outcome: TrialOutcome::Converged,
        final_err: Some(err),
        rate,
    }
}

fn median(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    })
}

/// Run every `(p, m)` cell, `p` outermost. Cells and trials run in parallel;
/// results are merged in `(cell, trial)` order.
pub fn stability_sweep(cfg: &SweepConfig) -> Result<Vec<SweepCell>> {
    cfg.validate()?;
    let cells: Vec<NormalizedParameters> = cfg
        .p_grid()
        .into_iter()
        .flat_map(|p| cfg.m_values.iter().map(move |&m| NormalizedParameters::new(p, m)))
        .collect::<Result<_>>()?;

    let results: Vec<TrialResult> = (0..cells.len() * cfg.trials)
        .into_par_iter()
        .map(|k| {
            let (cell, trial) = (k / cfg.trials, k % cfg.trials);
            let params = cells[cell];
            run_trial(cfg, params, params.equilibrium().y_bar, cell, trial)
        })
        .collect();

    Ok(cells
        .iter()
        .zip(results.chunks(cfg.trials))
        .map(|(params, trials)| {
            let count = |o: TrialOutcome| trials.iter().filter(|t| t.outcome == o).count();
            SweepCell {
                p: params.p(),
                m: params.m(),
                n_converged: count(TrialOutcome::Converged),
                n_diverged: count(TrialOutcome::Diverged),
                n_undetermined: count(TrialOutcome::Undetermined),
                median_err: median(trials.iter().filter_map(|t| t.final_err).collect()),
                median_rate: median(trials.iter().filter_map(|t| t.rate).collect()),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorSummary {
    pub p: f64,
    pub status: TrajectoryStatus,
    pub tail_min: Option<f64>,
    pub tail_max: Option<f64>,
    pub period: Option<usize>,
}

/// Simulate once per `p` from the same initial segment and summarize the
/// last `tail` values.
pub fn attractor_scan(p_grid: &[f64], m: usize, init: &InitialConditions, steps: usize, tail: usize) -> Result<Vec<AttractorSummary>> {
    if tail == 0 || tail > steps {
        return Err(Error::InvalidParameter(format!("tail must be in 1..={steps}, got {tail}")));
    }
    p_grid
        .par_iter()
        .map(|&p| {
            let params = NormalizedParameters::new(p, m)?;
            let traj = simulate(params, init, IterationGuard::with_steps(steps))?;
            if !traj.is_completed() {
                return Ok(AttractorSummary {
                    p,
                    status: traj.status,
                    tail_min: None,
                    tail_max: None,
                    period: None,
                });
            }
            let window = &traj.values[traj.len() - tail..];
            let tail_min = window.iter().copied().fold(f64::INFINITY, f64::min);
            let tail_max = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let max_period = (tail / 4).min(64);
            let period = if max_period >= 1 {
                detect_period_in(window, max_period, DEFAULT_PERIOD_TOLERANCE)?.period
            } else {
                None
            };
            Ok(AttractorSummary {
                p,
                status: traj.status,
                tail_min: Some(tail_min),
                tail_max: Some(tail_max),
                period,
            })
        })
        .collect()
}
