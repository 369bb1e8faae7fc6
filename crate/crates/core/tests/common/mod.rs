//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the routines it is used to check.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Positive root of `y^2 - y - p` by bisection on `[1, 1 + p]`.
pub fn bisect_equilibrium(p: f64) -> f64 {
    let f = |y: f64| y * y - y - p;
    let (mut lo, mut hi) = (1.0_f64, 1.0 + p);
    assert!(f(lo) < 0.0 && f(hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `p / y_bar^2` with `y_bar` from bisection.
pub fn lag_gain(p: f64) -> f64 {
    let y = bisect_equilibrium(p);
    p / (y * y)
}

/// Roots of `lambda^2 + 2c lambda - c` for delay one, `-c +- sqrt(c^2 + c)`.
pub fn quadratic_roots(p: f64) -> (f64, f64) {
    let c = lag_gain(p);
    let d = (c * c + c).sqrt();
    (-c + d, -c - d)
}

/// Log-spaced grid over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
}

/// Companion matrix of the monic polynomial with coefficients `c` (lowest
/// degree first, leading 1 included). First row holds `-c[n-1], ..., -c[0]`.
pub fn companion(c: &[f64]) -> Vec<Vec<f64>> {
    let n = c.len() - 1;
    let mut a = vec![vec![0.0; n]; n];
    for j in 0..n {
        a[0][j] = -c[n - 1 - j];
    }
    for i in 1..n {
        a[i][i - 1] = 1.0;
    }
    a
}

fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum()).collect()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Dominant eigenvalue modulus by power iteration. Each step fits
/// `x[k+2] = a x[k+1] + b x[k]` by least squares, which captures a dominant
/// real root or a dominant complex pair.
pub fn power_iteration_radius(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut x: Vec<f64> = (0..n).map(|k| 1.0 + 0.1 * k as f64).collect();
    let s = norm(&x);
    x.iter_mut().for_each(|v| *v /= s);
    let mut prev = f64::NAN;
    let mut stable = 0;
    let mut estimate = 0.0;
    for _ in 0..400_000 {
        let x1 = mat_vec(a, &x);
        let x2 = mat_vec(a, &x1);
        let (s00, s01, s11) = (
            x.iter().map(|v| v * v).sum::<f64>(),
            x.iter().zip(&x1).map(|(u, v)| u * v).sum::<f64>(),
            x1.iter().map(|v| v * v).sum::<f64>(),
        );
        let (t0, t1) = (
            x.iter().zip(&x2).map(|(u, v)| u * v).sum::<f64>(),
            x1.iter().zip(&x2).map(|(u, v)| u * v).sum::<f64>(),
        );
        // normal equations for [a, b] in x2 = a x1 + b x
        let det = s11 * s00 - s01 * s01;
        estimate = if det.abs() <= 1e-300 || det.abs() <= 1e-8 * s11 * s00 {
            norm(&x1) / norm(&x)
        } else {
            let fa = (t1 * s00 - t0 * s01) / det;
            let fb = (s11 * t0 - s01 * t1) / det;
            let disc = fa * fa + 4.0 * fb;
            if disc >= 0.0 {
                let r = disc.sqrt();
                ((fa + r) / 2.0).abs().max(((fa - r) / 2.0).abs())
            } else {
                (-fb).sqrt()
            }
        };
        if (estimate - prev).abs() <= 1e-14 * estimate.max(1e-300) {
            stable += 1;
            if stable >= 20 {
                return estimate;
            }
        } else {
            stable = 0;
        }
        prev = estimate;
        let s = norm(&x1);
        x = x1.into_iter().map(|v| v / s).collect();
    }
    estimate
}

/// Run-length scan over orbit values, written without any shared helper:
/// returns `(is_positive, length)` runs with ties counted positive.
pub fn scan_runs(values: &[f64], level: f64) -> Vec<(bool, usize)> {
    let mut runs = Vec::new();
    let mut i = 0;
    while i < values.len() {
        let positive = values[i] >= level;
        let mut j = i;
        while j < values.len() && (values[j] >= level) == positive {
            j += 1;
        }
        runs.push((positive, j - i));
        i = j;
    }
    runs
}

/// Plain iteration of the normalized map on a growable vector.
pub fn reference_orbit(p: f64, init: &[f64], steps: usize) -> Vec<f64> {
    let m = init.len() - 1;
    let mut y = init.to_vec();
    for _ in 0..steps {
        let n = y.len() - 1;
        y.push(1.0 + p * y[n - m] / (y[n] * y[n]));
    }
    y.split_off(m + 1)
}

/// Newton on `alpha = 1 + p/beta`, `beta = 1 + p/alpha` from `(a, b)`.
/// Returns the converged point or `None` when the iterate leaves the
/// positive quadrant or fails to settle.
pub fn newton_two_cycle_oracle(p: f64, mut a: f64, mut b: f64) -> Option<(f64, f64)> {
    for _ in 0..500 {
        let f = a - 1.0 - p / b;
        let g = b - 1.0 - p / a;
        if f.abs().max(g.abs()) < 1e-13 {
            return Some((a, b));
        }
        let (j11, j12, j21, j22) = (1.0, p / (b * b), p / (a * a), 1.0);
        let det = j11 * j22 - j12 * j21;
        if det.abs() < 1e-300 {
            return None;
        }
        a -= (j22 * f - j12 * g) / det;
        b -= (-j21 * f + j11 * g) / det;
        if !(a > 0.0 && b > 0.0) {
            return None;
        }
    }
    None
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_init<R: Rng>(rng: &mut R, m: usize, low: f64, high: f64) -> Vec<f64> {
    (0..=m).map(|_| rng.gen_range(low..high)).collect()
}
