use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::recurrence::{DeviationTrajectory, Trajectory};

/// Side of the equilibrium. Terms equal to the equilibrium count as positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn of_offset(offset: f64) -> Self {
        if offset >= 0.0 {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemiCycle {
    pub sign: Sign,
    /// Orbit index `n` of the first term.
    pub start_index: i64,
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiCycleDecomposition {
    pub cycles: Vec<SemiCycle>,
    /// Level the orbit was split against.
    pub reference: f64,
    /// The first cycle has no opposite-sign term before it.
    pub has_initial_partial: bool,
}

impl SemiCycleDecomposition {
    pub fn total_length(&self) -> usize {
        self.cycles.iter().map(|c| c.length).sum()
    }

    pub fn max_length(&self) -> usize {
        self.cycles.iter().map(|c| c.length).max().unwrap_or(0)
    }
}

/// Split a sign sequence into maximal runs. `predecessor` is the sign of the
/// term just before `start_index`, when known.
pub fn decompose_signs<I>(signs: I, start_index: i64, predecessor: Option<Sign>, reference: f64) -> SemiCycleDecomposition
where
    I: IntoIterator<Item = Sign>,
{
    let mut cycles: Vec<SemiCycle> = Vec::new();
    for (offset, sign) in signs.into_iter().enumerate() {
        match cycles.last_mut() {
            Some(last) if last.sign == sign => last.length += 1,
            _ => cycles.push(SemiCycle {
                sign,
                start_index: start_index + offset as i64,
                length: 1,
            }),
        }
    }
    let has_initial_partial = match (cycles.first(), predecessor) {
        (Some(first), Some(prev)) => first.sign == prev,
        _ => true,
    };
    SemiCycleDecomposition {
        cycles,
        reference,
        has_initial_partial,
    }
}

/// Semi-cycles of `y[1..=N]` relative to `y_bar`; positive runs are `>= y_bar`.
pub fn decompose_semicycles(traj: &Trajectory, y_bar: f64) -> SemiCycleDecomposition {
    let predecessor = traj.y(0).map(|y0| Sign::of_offset(y0 - y_bar));
    decompose_signs(traj.values.iter().map(|y| Sign::of_offset(y - y_bar)), 1, predecessor, y_bar)
}

/// Semi-cycles read off a deviation orbit, which resolves the side of the
/// equilibrium long after `y[n] - y_bar` has rounded to zero.
pub fn decompose_deviations(orbit: &DeviationTrajectory) -> SemiCycleDecomposition {
    let predecessor = orbit.initial.last().map(|&e| Sign::of_offset(e));
    decompose_signs(orbit.values.iter().map(|&e| Sign::of_offset(e)), 1, predecessor, orbit.y_bar)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiCycleBoundCheck {
    pub holds: bool,
    pub bound: usize,
    pub offending: Vec<SemiCycle>,
}

/// Every semi-cycle preceded by an opposite-sign term has at most `m` terms.
/// The first cycle is exempt when it has no such predecessor.
pub fn check_max_semicycle_length(dec: &SemiCycleDecomposition, m: usize) -> SemiCycleBoundCheck {
    let skip = usize::from(dec.has_initial_partial);
    let offending: Vec<SemiCycle> = dec.cycles.iter().skip(skip).filter(|c| c.length > m).copied().collect();
    SemiCycleBoundCheck {
        holds: offending.is_empty(),
        bound: m,
        offending,
    }
}

fn alternation_on_offsets(initial: &[f64], offsets: &[f64]) -> Result<bool> {
    let m = initial.len().saturating_sub(1);
    if m.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("alternation pattern needs an odd delay, got m = {m}")));
    }
    for (k, &e) in initial.iter().enumerate() {
        let index = k as i64 - m as i64;
        let ok = if index.rem_euclid(2) == 1 { e <= 0.0 } else { e > 0.0 };
        if !ok {
            return Err(Error::PatternMismatch { index });
        }
    }
    Ok(offsets.iter().enumerate().all(|(k, &e)| {
        let n = k + 1;
        if n % 2 == 1 {
            e < 0.0
        } else {
            e > 0.0
        }
    }))
}

/// Odd-indexed terms strictly below `y_bar` and even-indexed terms strictly
/// above, for every computed `n`. The initial segment must already follow
/// that pattern (odd indices `<= y_bar`, even indices `> y_bar`).
pub fn check_alternation(traj: &Trajectory, y_bar: f64, m: usize) -> Result<bool> {
    if traj.params.m() != m {
        return Err(Error::InvalidParameter(format!(
            "trajectory delay {} does not match m = {m}",
            traj.params.m()
        )));
    }
    let initial: Vec<f64> = traj.initial.values().iter().map(|y| y - y_bar).collect();
    alternation_on_offsets(&initial, &traj.deviations(y_bar))
}

pub fn check_alternation_deviations(orbit: &DeviationTrajectory) -> Result<bool> {
    alternation_on_offsets(&orbit.initial, &orbit.values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NormalizedParameters;
    use crate::recurrence::{simulate, simulate_deviations, InitialConditions, IterationGuard};

    #[test]
    fn constant_orbit_is_one_positive_cycle() {
        let params = NormalizedParameters::new(2.0, 1).unwrap();
        let traj = simulate(params, &InitialConditions::constant(2.0, 1).unwrap(), IterationGuard::with_steps(25)).unwrap();
        let dec = decompose_semicycles(&traj, 2.0);
        assert_eq!(dec.cycles, vec![SemiCycle { sign: Sign::Positive, start_index: 1, length: 25 }]);
        assert!(dec.has_initial_partial);
        assert!(check_max_semicycle_length(&dec, 1).holds);
    }

    #[test]
    fn synthetic_alternation_has_unit_lengths() {
        let y_bar = 1.5;
        let signs = (0..10).map(|k| Sign::of_offset(if k % 2 == 0 { 0.1 } else { -0.1 }));
        let dec = decompose_signs(signs, 1, None, y_bar);
        assert_eq!(dec.cycles.len(), 10);
        assert!(dec.cycles.iter().all(|c| c.length == 1));
        assert_eq!(dec.total_length(), 10);
    }

    #[test]
    fn violating_sequence_is_reported() {
        // one term below, then m + 1 terms at or above
        let m = 2;
        let offsets = [0.3, -0.2, 0.1, 0.0, 0.4, -0.1];
        let dec = decompose_signs(offsets.iter().map(|&e| Sign::of_offset(e)), 1, Some(Sign::Negative), 0.0);
        let check = check_max_semicycle_length(&dec, m);
        assert!(!check.holds);
        assert_eq!(check.offending, vec![SemiCycle { sign: Sign::Positive, start_index: 3, length: 3 }]);
    }

    #[test]
    fn first_cycle_checked_when_predecessor_is_opposite() {
        let offsets = [0.3, 0.2, 0.1, -0.1];
        let dec = decompose_signs(offsets.iter().map(|&e| Sign::of_offset(e)), 1, Some(Sign::Negative), 0.0);
        assert!(!dec.has_initial_partial);
        assert!(!check_max_semicycle_length(&dec, 2).holds);
        let dec = decompose_signs(offsets.iter().map(|&e| Sign::of_offset(e)), 1, Some(Sign::Positive), 0.0);
        assert!(check_max_semicycle_length(&dec, 2).holds);
    }

    #[test]
    fn alternation_pattern_is_enforced() {
        let p = 0.3;
        let params = NormalizedParameters::new(p, 1).unwrap();
        let y_bar = params.equilibrium().y_bar;
        // y[-1] above the equilibrium breaks the pattern
        let bad = InitialConditions::new(vec![y_bar + 0.2, y_bar + 0.2], 1).unwrap();
        let traj = simulate(params, &bad, IterationGuard::with_steps(20)).unwrap();
        assert_eq!(check_alternation(&traj, y_bar, 1), Err(Error::PatternMismatch { index: -1 }));

        let good = InitialConditions::new(vec![y_bar - 0.2, y_bar + 0.2], 1).unwrap();
        let orbit = simulate_deviations(params, &good, IterationGuard::with_steps(200)).unwrap();
        assert!(check_alternation_deviations(&orbit).unwrap());
    }

    #[test]
    fn alternation_rejects_even_delay() {
        let params = NormalizedParameters::new(0.3, 2).unwrap();
        let traj = simulate(params, &InitialConditions::constant(1.0, 2).unwrap(), IterationGuard::with_steps(5)).unwrap();
        assert!(matches!(check_alternation(&traj, 1.2, 2), Err(Error::InvalidParameter(_))));
    }
}
