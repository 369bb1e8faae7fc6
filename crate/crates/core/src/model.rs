//! Model parameters, the normalization `y = x / A` and closed-form equilibria.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of `x[n+1] = A + B * x[n-m] / x[n]^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    a: f64,
    b: f64,
    m: usize,
}

impl Parameters {
    pub fn new(a: f64, b: f64, m: usize) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidParameter(format!("A must be positive, got {a}")));
        }
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::InvalidParameter(format!("B must be positive, got {b}")));
        }
        check_delay(m)?;
        Ok(Self { a, b, m })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Reduce to the single-parameter form `y[n+1] = 1 + p * y[n-m] / y[n]^2`
    /// with `p = B / A^2`.
    pub fn normalize(&self) -> NormalizedParameters {
        NormalizedParameters {
            p: self.b / (self.a * self.a),
            m: self.m,
        }
    }
}

/// Parameters of the normalized equation `y[n+1] = 1 + p * y[n-m] / y[n]^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedParameters {
    p: f64,
    m: usize,
}

impl NormalizedParameters {
    pub fn new(p: f64, m: usize) -> Result<Self> {
        check_p(p)?;
        check_delay(m)?;
        Ok(Self { p, m })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Order of the recurrence, `m + 1`.
    pub fn order(&self) -> usize {
        self.m + 1
    }

    pub fn equilibrium(&self) -> Equilibrium {
        Equilibrium::from_y_bar(equilibrium_value(self.p))
    }
}

pub fn normalize(params: &Parameters) -> NormalizedParameters {
    params.normalize()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub y_bar: f64,
    /// Fixed point of the unnormalized equation, present when `A` is known.
    pub x_bar: Option<f64>,
}

impl Equilibrium {
    fn from_y_bar(y_bar: f64) -> Self {
        Self { y_bar, x_bar: None }
    }

    pub fn with_scale(self, a: f64) -> Self {
        Self {
            y_bar: self.y_bar,
            x_bar: Some(a * self.y_bar),
        }
    }

    /// `|y^2 - y - p|` at the stored equilibrium.
    pub fn residual(&self, p: f64) -> f64 {
        (self.y_bar * self.y_bar - self.y_bar - p).abs()
    }
}

/// Unique positive equilibrium `(1 + sqrt(1 + 4p)) / 2`.
pub fn equilibrium(p: f64) -> Result<Equilibrium> {
    check_p(p)?;
    Ok(Equilibrium::from_y_bar(equilibrium_value(p)))
}

/// Equilibrium of `x[n+1] = A + B * x[n-m] / x[n]^2`, i.e. `A * y_bar(B / A^2)`.
pub fn equilibrium_x(params: &Parameters) -> Equilibrium {
    params.normalize().equilibrium().with_scale(params.a())
}

/// Equilibrium `1 / (1 - p)` of the linear majorant `u[n+1] = 1 + p * u[n-m]`.
pub fn comparison_equilibrium(p: f64) -> Result<f64> {
    check_p(p)?;
    if p >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "comparison equation has no positive equilibrium for p >= 1, got {p}"
        )));
    }
    Ok(1.0 / (1.0 - p))
}

pub(crate) fn equilibrium_value(p: f64) -> f64 {
    0.5 * (1.0 + (1.0 + 4.0 * p).sqrt())
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("p must be positive and finite, got {p}")))
    }
}

pub(crate) fn check_delay(m: usize) -> Result<()> {
    if m >= 1 {
        Ok(())
    } else {
        Err(Error::InvalidParameter("delay m must be at least 1".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_examples() {
        let n = Parameters::new(2.0, 2.0, 1).unwrap().normalize();
        assert_eq!((n.p(), n.m()), (0.5, 1));
        let n = Parameters::new(1.0, 7.0, 3).unwrap().normalize();
        assert_eq!((n.p(), n.m()), (7.0, 3));
        let n = Parameters::new(3.0, 4.5, 2).unwrap().normalize();
        assert_eq!((n.p(), n.m()), (0.5, 2));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Parameters::new(0.0, 1.0, 1).is_err());
        assert!(Parameters::new(1.0, -1.0, 1).is_err());
        assert!(Parameters::new(1.0, 1.0, 0).is_err());
        assert!(Parameters::new(f64::NAN, 1.0, 1).is_err());
        assert!(NormalizedParameters::new(0.0, 1).is_err());
        assert!(equilibrium(-1.0).is_err());
        assert!(equilibrium(0.0).is_err());
    }

    #[test]
    fn equilibrium_exact_cases() {
        assert_eq!(equilibrium(2.0).unwrap().y_bar, 2.0);
        assert_eq!(equilibrium(0.75).unwrap().y_bar, 1.5);
        assert_eq!(equilibrium(6.0).unwrap().y_bar, 3.0);
    }

    #[test]
    fn x_equilibrium_is_scaled() {
        let params = Parameters::new(2.0, 8.0, 1).unwrap();
        let eq = equilibrium_x(&params);
        assert_eq!(eq.x_bar, Some(4.0));
    }

    #[test]
    fn comparison_equilibrium_examples() {
        assert_eq!(comparison_equilibrium(0.5).unwrap(), 2.0);
        assert!((comparison_equilibrium(0.9).unwrap() - 10.0).abs() < 1e-12);
        assert!((comparison_equilibrium(1e-12).unwrap() - 1.0).abs() < 1e-9);
        assert!(comparison_equilibrium(1.0).is_err());
        assert!(comparison_equilibrium(3.0).is_err());
        assert!(comparison_equilibrium(0.0).is_err());
    }
}
