//! Period-two solutions for even delays. A two-cycle `alpha, beta, alpha, ...`
//! must satisfy `alpha = 1 + p / beta` and `beta = 1 + p / alpha`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::equilibrium;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NewtonOutcome {
    Converged { alpha: f64, beta: f64 },
    LeftPositiveQuadrant { alpha: f64, beta: f64 },
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoCycleReport {
    pub p: f64,
    /// Distinct positive solutions `(alpha, beta)` found.
    pub positive_solutions: Vec<(f64, f64)>,
    /// `|alpha - 1 - p/beta| + |beta - 1 - p/alpha|` at each solution.
    pub residuals: Vec<f64>,
    pub newton_starts: Vec<(f64, f64)>,
    pub newton_outcomes: Vec<NewtonOutcome>,
    /// Some Newton run landed on a positive solution with `alpha != beta`.
    pub asymmetric_found: bool,
}

fn residual(p: f64, alpha: f64, beta: f64) -> (f64, f64) {
    (alpha - 1.0 - p / beta, beta - 1.0 - p / alpha)
}

/// Newton's method on the two-cycle system from `start`.
pub fn newton_two_cycle(p: f64, start: (f64, f64)) -> NewtonOutcome {
    let (mut a, mut b) = start;
    for _ in 0..200 {
        let (f, g) = residual(p, a, b);
        if f.abs() + g.abs() <= 1e-14 * (1.0 + a.abs() + b.abs()) {
            return NewtonOutcome::Converged { alpha: a, beta: b };
        }
        // Jacobian [[1, p/b^2], [p/a^2, 1]]
        let (j12, j21) = (p / (b * b), p / (a * a));
        let det = 1.0 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            return NewtonOutcome::Stalled;
        }
        let da = (f - j12 * g) / det;
        let db = (g - j21 * f) / det;
        a -= da;
        b -= db;
        if !(a.is_finite() && b.is_finite()) {
            return NewtonOutcome::Stalled;
        }
        if a <= 0.0 || b <= 0.0 {
            return NewtonOutcome::LeftPositiveQuadrant { alpha: a, beta: b };
        }
    }
    NewtonOutcome::Stalled
}

fn default_starts(y_bar: f64) -> Vec<(f64, f64)> {
    // 20 asymmetric starts spread over a box around the equilibrium
    let mut starts = Vec::with_capacity(20);
    for i in 0..5 {
        for j in 0..4 {
            let a = y_bar * (0.2 + 0.45 * i as f64);
            let b = y_bar * (0.3 + 0.55 * j as f64) + 0.05;
            starts.push((a, b));
        }
    }
    starts
}

/// Positive solutions of the two-cycle system. Subtracting the equations gives
/// `(alpha - beta)(1 - p/(alpha beta)) = 0`; the second factor forces
/// `alpha beta = beta + p = p`, so `beta = 0`, leaving only the symmetric
/// root. A multi-start Newton search is run alongside as a numerical check.
pub fn two_cycle_analysis(p: f64) -> Result<TwoCycleReport> {
    let y_bar = equilibrium(p)?.y_bar;
    let starts = default_starts(y_bar);
    let outcomes: Vec<NewtonOutcome> = starts.iter().map(|&s| newton_two_cycle(p, s)).collect();

    let mut solutions: Vec<(f64, f64)> = vec![(y_bar, y_bar)];
    let mut asymmetric_found = false;
    for outcome in &outcomes {
        if let NewtonOutcome::Converged { alpha, beta } = *outcome {
            if alpha > 0.0 && beta > 0.0 {
                let scale = alpha.abs().max(beta.abs());
                if (alpha - beta).abs() > 1e-9 * scale {
                    asymmetric_found = true;
                }
                let known = solutions
                    .iter()
                    .any(|&(a, b)| (a - alpha).abs() <= 1e-9 * scale && (b - beta).abs() <= 1e-9 * scale);
                if !known {
                    solutions.push((alpha, beta));
                }
            }
        }
    }
    let residuals = solutions
        .iter()
        .map(|&(a, b)| {
            let (f, g) = residual(p, a, b);
            f.abs() + g.abs()
        })
        .collect();
    Ok(TwoCycleReport {
        p,
        positive_solutions: solutions,
        residuals,
        newton_starts: starts,
        newton_outcomes: outcomes,
        asymmetric_found,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_two_has_only_equilibrium() {
        let r = two_cycle_analysis(2.0).unwrap();
        assert_eq!(r.positive_solutions, vec![(2.0, 2.0)]);
        assert!(!r.asymmetric_found);
        assert!(r.residuals[0] < 1e-15);
    }

    #[test]
    fn p_half_matches_equilibrium() {
        let y_bar = equilibrium(0.5).unwrap().y_bar;
        let r = two_cycle_analysis(0.5).unwrap();
        assert_eq!(r.positive_solutions, vec![(y_bar, y_bar)]);
    }

    #[test]
    fn starts_are_asymmetric() {
        let r = two_cycle_analysis(1.0).unwrap();
        assert_eq!(r.newton_starts.len(), 20);
        assert!(r.newton_starts.iter().all(|(a, b)| a != b));
    }

    #[test]
    fn newton_from_near_symmetric_point() {
        match newton_two_cycle(2.0, (2.1, 1.9)) {
            NewtonOutcome::Converged { alpha, beta } => {
                assert!((alpha - 2.0).abs() < 1e-12 && (beta - 2.0).abs() < 1e-12)
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
