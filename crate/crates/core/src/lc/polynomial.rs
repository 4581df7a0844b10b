//! Polynomials `phi(z) = sum a_j z^{i_j}` with sorted coefficients and sorted
//! positive exponents. Such a polynomial has at most one positive root and is
//! increasing wherever it is nonnegative, which is what pins down the
//! thresholds below which the geometric pieces cannot balance the mean.

use crate::error::{Error, Result};
use crate::numeric::newton_bisect;

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonePolynomial {
    exponents: Vec<u32>,
    coeffs: Vec<f64>,
}

impl MonotonePolynomial {
    pub fn new(exponents: Vec<u32>, coeffs: Vec<f64>) -> Result<Self> {
        if exponents.len() != coeffs.len() {
            return Err(Error::InvariantViolation(format!(
                "{} exponents for {} coefficients",
                exponents.len(),
                coeffs.len()
            )));
        }
        if exponents.first().is_some_and(|&e| e == 0) {
            return Err(Error::InvariantViolation(
                "exponents must be positive".into(),
            ));
        }
        if exponents.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvariantViolation("exponents not sorted".into()));
        }
        if coeffs.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::InvariantViolation("coefficients not sorted".into()));
        }
        Ok(Self { exponents, coeffs })
    }

    /// `sum_{j=1}^{M} c_j z^j`.
    pub fn consecutive(coeffs: Vec<f64>) -> Result<Self> {
        let exponents = (1..=coeffs.len() as u32).collect();
        Self::new(exponents, coeffs)
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.exponents
            .iter()
            .zip(&self.coeffs)
            .map(|(&e, &c)| c * z.powi(e as i32))
            .sum()
    }

    /// `phi(e^t) e^{-shift}` and its `t`-derivative.
    fn eval_log(&self, t: f64, shift: f64) -> (f64, f64) {
        let mut value = 0.0;
        let mut deriv = 0.0;
        for (&e, &c) in self.exponents.iter().zip(&self.coeffs) {
            let term = c * (e as f64 * t - shift).exp();
            value += term;
            deriv += e as f64 * term;
        }
        (value, deriv)
    }

    fn shift_at(&self, t: f64) -> f64 {
        let lo = *self.exponents.first().unwrap() as f64 * t;
        let hi = *self.exponents.last().unwrap() as f64 * t;
        lo.max(hi)
    }

    fn sign_log(&self, t: f64) -> f64 {
        self.eval_log(t, self.shift_at(t)).0
    }

    /// Log of the unique positive root, if `phi` changes sign on `(0, inf)`.
    pub fn unique_positive_log_root(&self) -> Option<f64> {
        if self.is_empty() {
            return None;
        }
        let neg = self.coeffs.iter().any(|&c| c < 0.0);
        let pos = self.coeffs.iter().any(|&c| c > 0.0);
        if !(neg && pos) {
            return None;
        }
        const LIMIT: f64 = 1024.0;
        let mut hi = 0.0;
        let mut step = 1.0;
        while self.sign_log(hi) <= 0.0 {
            hi += step;
            step *= 2.0;
            if hi > LIMIT {
                return None;
            }
        }
        let mut lo = 0.0;
        let mut step = 1.0;
        while self.sign_log(lo) >= 0.0 {
            lo -= step;
            step *= 2.0;
            if lo < -LIMIT {
                return None;
            }
        }
        let shift = self.shift_at(lo).max(self.shift_at(hi));
        Some(newton_bisect(
            |t| self.eval_log(t, shift),
            lo,
            hi,
            1e-15,
            200,
        ))
    }

    pub fn unique_positive_root(&self) -> Option<f64> {
        self.unique_positive_log_root().map(f64::exp)
    }
}

/// Free-function form over consecutive exponents `1..=M`.
pub fn unique_positive_root(p: &MonotonePolynomial) -> Option<f64> {
    p.unique_positive_root()
}
