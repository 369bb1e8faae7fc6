//! Linearization about the positive equilibrium, the characteristic
//! polynomial and its roots, and local stability classification.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_delay, check_p, equilibrium_value};

/// Half-width of the band around spectral radius 1 reported as marginal.
pub const MARGINAL_TOLERANCE: f64 = 1e-9;

/// Coefficients of `z[n+1] = q0 * z[n] + q_m * z[n-m]`; the intermediate lags
/// all have zero weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearizedCoefficients {
    pub q0: f64,
    pub q_m: f64,
    pub m: usize,
}

impl LinearizedCoefficients {
    /// Full coefficient vector `q_0, ..., q_m`.
    pub fn as_vec(&self) -> Vec<f64> {
        let mut q = vec![0.0; self.m + 1];
        q[0] = self.q0;
        q[self.m] += self.q_m;
        q
    }

    pub fn abs_sum(&self) -> f64 {
        self.q0.abs() + self.q_m.abs()
    }
}

pub fn linearize(p: f64, m: usize) -> Result<LinearizedCoefficients> {
    check_p(p)?;
    check_delay(m)?;
    let y_bar = equilibrium_value(p);
    let q_m = p / (y_bar * y_bar);
    Ok(LinearizedCoefficients { q0: -2.0 * q_m, q_m, m })
}

/// Monic polynomial with real coefficients stored lowest degree first:
/// `coefficients[k]` multiplies `lambda^k` and the last entry is 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicPolynomial {
    coefficients: Vec<f64>,
}

impl CharacteristicPolynomial {
    pub fn monic(coefficients: Vec<f64>) -> Result<Self> {
        match coefficients.last() {
            Some(&lead) if coefficients.len() >= 2 && lead == 1.0 => {}
            _ => {
                return Err(Error::InvalidParameter(
                    "polynomial must be monic with degree at least 1".into(),
                ))
            }
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("polynomial coefficients must be finite".into()));
        }
        Ok(Self { coefficients })
    }

    /// `lambda^(m+1) - q0 * lambda^m - q_m`.
    pub fn from_linearization(coeffs: &LinearizedCoefficients) -> Self {
        let degree = coeffs.m + 1;
        let mut c = vec![0.0; degree + 1];
        c[0] = -coeffs.q_m;
        c[degree - 1] -= coeffs.q0;
        c[degree] = 1.0;
        Self { coefficients: c }
    }

    /// `lambda^(m+1) - p`, the characteristic polynomial of the comparison equation.
    pub fn comparison(p: f64, m: usize) -> Self {
        let mut c = vec![0.0; m + 2];
        c[0] = -p;
        c[m + 1] = 1.0;
        Self { coefficients: c }
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coefficients
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut value = Complex64::new(0.0, 0.0);
        let mut deriv = Complex64::new(0.0, 0.0);
        for &c in self.coefficients.iter().rev() {
            deriv = deriv * z + value;
            value = value * z + c;
        }
        (value, deriv)
    }

    /// `sum |a_k| |z|^k`, the natural magnitude of the terms summed in `P(z)`.
    pub fn magnitude_scale(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * r + c.abs())
    }

    /// Fujiwara's bound on the root moduli.
    fn root_bound(&self) -> f64 {
        let n = self.degree();
        (1..=n)
            .map(|k| {
                let a = self.coefficients[n - k].abs();
                let a = if k == n { a / 2.0 } else { a };
                a.powf(1.0 / k as f64)
            })
            .fold(0.0, f64::max)
            * 2.0
    }
}

pub fn characteristic_polynomial(coeffs: &LinearizedCoefficients) -> CharacteristicPolynomial {
    CharacteristicPolynomial::from_linearization(coeffs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootFinderOptions {
    pub max_iterations: usize,
    pub tolerance: f64,
    /// Residual target relative to `max(1, |P|-scale)` at each root.
    pub residual_tolerance: f64,
}

impl Default for RootFinderOptions {
    fn default() -> Self {
        Self {
            max_iterations: 1000,
            tolerance: 1e-12,
            residual_tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    /// Sorted by decreasing modulus, ties by decreasing imaginary part.
    pub roots: Vec<Complex64>,
    /// `|P(lambda)|` at each root.
    pub residuals: Vec<f64>,
    pub spectral_radius: f64,
    pub iterations: usize,
}

impl RootSet {
    /// Coefficients of `prod (lambda - r)`, lowest degree first.
    pub fn expand(&self) -> Vec<Complex64> {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for &r in &self.roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (k, &ck) in c.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= ck * r;
            }
            c = next;
        }
        c
    }

    /// Largest coefficient mismatch between the expanded roots and `poly`.
    pub fn vieta_error(&self, poly: &CharacteristicPolynomial) -> f64 {
        self.expand()
            .iter()
            .zip(poly.coefficients())
            .map(|(a, &b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// All complex roots by Weierstrass (Durand-Kerner) simultaneous iteration,
/// followed by a Newton polish of each root.
pub fn find_roots(poly: &CharacteristicPolynomial) -> Result<RootSet> {
    find_roots_with(poly, RootFinderOptions::default())
}

pub fn find_roots_with(poly: &CharacteristicPolynomial, opts: RootFinderOptions) -> Result<RootSet> {
    let n = poly.degree();
    let radius = poly.root_bound().max(1.0);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4))
        .collect();

    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        let mut max_change: f64 = 0.0;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() == 0.0 {
                // coincident iterates; nudge apart
                z[i] += Complex64::new(opts.tolerance, opts.tolerance);
                max_change = f64::INFINITY;
                continue;
            }
            let delta = poly.eval(z[i]) / denom;
            z[i] -= delta;
            max_change = max_change.max(delta.norm() / z[i].norm().max(1.0));
        }
        if !max_change.is_finite() && z.iter().any(|v| !v.is_finite()) {
            break;
        }
        if max_change <= opts.tolerance {
            break;
        }
    }

    for root in z.iter_mut() {
        for _ in 0..3 {
            let (value, deriv) = poly.eval_with_derivative(*root);
            if deriv.norm() == 0.0 {
                break;
            }
            let candidate = *root - value / deriv;
            if poly.eval(candidate).norm() < value.norm() {
                *root = candidate;
            } else {
                break;
            }
        }
        if root.im.abs() <= 1e-14 * root.norm().max(1.0) && poly.eval(Complex64::new(root.re, 0.0)).norm() <= poly.eval(*root).norm() {
            root.im = 0.0;
        }
    }

    let residuals: Vec<f64> = z.iter().map(|&r| poly.eval(r).norm()).collect();
    let worst = z
        .iter()
        .zip(&residuals)
        .map(|(&r, &res)| res / poly.magnitude_scale(r).max(1.0))
        .fold(0.0, f64::max);
    if !(worst <= opts.residual_tolerance) {
        return Err(Error::NonConvergence {
            iterations,
            residual: residuals.iter().copied().fold(0.0, f64::max),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        z[b].norm()
            .total_cmp(&z[a].norm())
            .then(z[b].im.total_cmp(&z[a].im))
    });
    let roots: Vec<Complex64> = order.iter().map(|&i| z[i]).collect();
    let residuals = order.iter().map(|&i| residuals[i]).collect();
    let spectral_radius = roots.iter().map(|r| r.norm()).fold(0.0, f64::max);
    Ok(RootSet {
        roots,
        residuals,
        spectral_radius,
        iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClarkCondition {
    /// `|q0| + |q_m| = 3p / y_bar^2`.
    pub sum: f64,
    pub holds: bool,
}

/// Clark's sufficient condition for local asymptotic stability, `sum |q_i| < 1`.
pub fn clark_condition(p: f64) -> Result<ClarkCondition> {
    check_p(p)?;
    let y_bar = equilibrium_value(p);
    let sum = 3.0 * p / (y_bar * y_bar);
    Ok(ClarkCondition { sum, holds: sum < 1.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    LocallyStable,
    Marginal,
    Unstable,
}

impl Stability {
    pub fn from_spectral_radius(rho: f64) -> Self {
        if rho < 1.0 - MARGINAL_TOLERANCE {
            Self::LocallyStable
        } else if rho > 1.0 + MARGINAL_TOLERANCE {
            Self::Unstable
        } else {
            Self::Marginal
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub p: f64,
    pub m: usize,
    pub clark_sum: f64,
    pub clark_holds: bool,
    pub spectral_radius: f64,
    pub classification: Stability,
    pub polynomial: CharacteristicPolynomial,
    pub roots: RootSet,
}

/// Clark's condition and the spectral radius, reported side by side. The
/// classification comes from the spectral radius alone.
pub fn classify_stability(p: f64, m: usize) -> Result<StabilityReport> {
    let coeffs = linearize(p, m)?;
    let polynomial = characteristic_polynomial(&coeffs);
    let roots = find_roots(&polynomial)?;
    let clark = clark_condition(p)?;
    Ok(StabilityReport {
        p,
        m,
        clark_sum: clark.sum,
        clark_holds: clark.holds,
        spectral_radius: roots.spectral_radius,
        classification: Stability::from_spectral_radius(roots.spectral_radius),
        polynomial,
        roots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn linearize_examples() {
        let c = linearize(0.75, 3).unwrap();
        assert!(close(c.q0, -2.0 / 3.0, 1e-15) && close(c.q_m, 1.0 / 3.0, 1e-15));
        let c = linearize(2.0, 1).unwrap();
        assert_eq!((c.q0, c.q_m), (-1.0, 0.5));
        let c = linearize(6.0, 2).unwrap();
        assert!(close(c.q0, -4.0 / 3.0, 1e-15) && close(c.q_m, 2.0 / 3.0, 1e-15));
        assert_eq!(c.q0, -2.0 * c.q_m);
        assert_eq!(c.as_vec().len(), 3);
    }

    #[test]
    fn polynomial_examples() {
        let poly = characteristic_polynomial(&linearize(2.0, 1).unwrap());
        assert_eq!(poly.coefficients(), &[-0.5, 1.0, 1.0]);
        let poly = characteristic_polynomial(&linearize(0.75, 2).unwrap());
        let c = poly.coefficients();
        assert_eq!(c.len(), 4);
        assert!(close(c[0], -1.0 / 3.0, 1e-15) && c[1] == 0.0 && close(c[2], 2.0 / 3.0, 1e-15) && c[3] == 1.0);
    }

    #[test]
    fn delay_one_coefficients_merge() {
        let c = linearize(2.0, 1).unwrap();
        assert_eq!(c.as_vec(), vec![-1.0, 0.5]);
    }

    #[test]
    fn monic_validation() {
        assert!(CharacteristicPolynomial::monic(vec![1.0]).is_err());
        assert!(CharacteristicPolynomial::monic(vec![1.0, 2.0]).is_err());
        assert!(CharacteristicPolynomial::monic(vec![-1.0, 0.0, 1.0]).is_ok());
    }

    #[test]
    fn roots_of_lambda_squared_minus_one() {
        let poly = CharacteristicPolynomial::monic(vec![-1.0, 0.0, 1.0]).unwrap();
        let rs = find_roots(&poly).unwrap();
        assert!(close(rs.roots[0].re, 1.0, 1e-12) && rs.roots[0].im == 0.0);
        assert!(close(rs.roots[1].re, -1.0, 1e-12) && rs.roots[1].im == 0.0);
        assert!(close(rs.spectral_radius, 1.0, 1e-12));
    }

    #[test]
    fn roots_of_comparison_polynomial_lie_on_circle() {
        for m in 1..=6 {
            let p = 0.37;
            let rs = find_roots(&CharacteristicPolynomial::comparison(p, m)).unwrap();
            let modulus = p.powf(1.0 / (m + 1) as f64);
            for j in 0..=m {
                let expected = Complex64::from_polar(modulus, 2.0 * std::f64::consts::PI * j as f64 / (m + 1) as f64);
                let nearest = rs.roots.iter().map(|r| (r - expected).norm()).fold(f64::INFINITY, f64::min);
                assert!(nearest < 1e-10, "m={m} j={j} nearest={nearest}");
            }
        }
    }

    #[test]
    fn roots_exhausted_iterations_is_error() {
        let poly = characteristic_polynomial(&linearize(0.3, 6).unwrap());
        let opts = RootFinderOptions { max_iterations: 1, ..Default::default() };
        assert!(matches!(find_roots_with(&poly, opts), Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn clark_examples() {
        let c = clark_condition(0.75).unwrap();
        assert!(close(c.sum, 1.0, 1e-12));
        assert!(!c.holds);
        let c = clark_condition(2.0).unwrap();
        assert_eq!(c.sum, 1.5);
        assert!(!c.holds);
        assert!(clark_condition(0.3).unwrap().holds);
    }

    #[test]
    fn stability_bands() {
        assert_eq!(Stability::from_spectral_radius(0.5), Stability::LocallyStable);
        assert_eq!(Stability::from_spectral_radius(1.0 + 1e-10), Stability::Marginal);
        assert_eq!(Stability::from_spectral_radius(1.1), Stability::Unstable);
    }

    #[test]
    fn classify_half_is_stable_for_small_delays() {
        for m in 1..=8 {
            let report = classify_stability(0.5, m).unwrap();
            assert!(report.clark_holds);
            assert_eq!(report.classification, Stability::LocallyStable);
        }
    }
}
