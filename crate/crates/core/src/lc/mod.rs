//! Exact solver for the two-moment problem over log-concave distributions.
//!
//! Optimal extreme points are piecewise geometric with at most two pieces, so
//! the search runs over support triples `(k, v1, ell)` (left end, breakpoint,
//! right end) and, for each triple, over the finitely many ratio pairs that
//! satisfy the moment conditions.

pub mod polynomial;
pub mod reduction;
mod solver;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use polynomial::{unique_positive_root, MonotonePolynomial};
pub use reduction::{alpha0_beta0, g_residual, h_of_alpha, Reduction};
pub use solver::{find_candidate_roots, solve_lc, solve_support, SupportSolution};

/// One-based `(k, v1, ell)` with `k <= v1 <= ell`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SupportTriple {
    pub k: usize,
    pub v1: usize,
    pub ell: usize,
}

impl SupportTriple {
    pub fn new(k: usize, v1: usize, ell: usize) -> Result<Self> {
        if !(1 <= k && k <= v1 && v1 <= ell) {
            return Err(Error::InvalidInput(format!(
                "support triple ({k}, {v1}, {ell}) is not ordered"
            )));
        }
        Ok(Self { k, v1, ell })
    }

    /// Number of points left of the breakpoint.
    pub fn k_tilde(&self) -> usize {
        self.v1 - self.k
    }

    /// Number of points right of the breakpoint.
    pub fn l_tilde(&self) -> usize {
        self.ell - self.v1
    }

    pub fn support_size(&self) -> usize {
        self.ell - self.k + 1
    }

    /// All triples over `1..=n` in lexicographic order.
    pub fn enumerate(n: usize) -> Vec<SupportTriple> {
        let mut out = Vec::new();
        for k in 1..=n {
            for v1 in k..=n {
                for ell in v1..=n {
                    out.push(SupportTriple { k, v1, ell });
                }
            }
        }
        out
    }
}

/// A two-piece geometric distribution: mass `rho` at `v1`, `rho e^{beta j}`
/// at `v1 - j` and `rho e^{alpha j}` at `v1 + j`. `alpha` / `beta` are `None`
/// when the corresponding piece is empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseGeometricCandidate {
    pub triple: SupportTriple,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub rho: f64,
    /// `|f|` at the root (standardized first moment, scaled by `1 / rho`).
    pub f_residual: f64,
    /// `|g|` at the root.
    pub g_residual: f64,
}

impl PiecewiseGeometricCandidate {
    /// Dense mass vector over `n` support points.
    pub fn mass(&self, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        let v = self.triple.v1 - 1;
        x[v] = self.rho;
        if let Some(beta) = self.beta {
            for j in 1..=self.triple.k_tilde() {
                x[v - j] = self.rho * (beta * j as f64).exp();
            }
        }
        if let Some(alpha) = self.alpha {
            for j in 1..=self.triple.l_tilde() {
                x[v + j] = self.rho * (alpha * j as f64).exp();
            }
        }
        x
    }

    /// Junction log-concavity `alpha + beta <= tol` (vacuous for one piece).
    pub fn junction_ok(&self, tol: f64) -> bool {
        match (self.alpha, self.beta) {
            (Some(a), Some(b)) => a + b <= tol,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootScanConfig {
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub beta_hi: f64,
    pub scan_points: usize,
    /// Upper limit for adaptive grid doubling.
    pub max_scan_points: usize,
    pub newton_tol: f64,
    pub max_iter: usize,
    /// Accepted `alpha + beta` at the breakpoint.
    pub junction_tol: f64,
    /// Moment residual a candidate must meet.
    pub moment_tol: f64,
    /// Tolerance on the moment equation left unused by tiny supports.
    pub consistency_tol: f64,
    pub threads: Option<usize>,
}

impl Default for RootScanConfig {
    fn default() -> Self {
        Self {
            alpha_lo: -50.0,
            alpha_hi: 50.0,
            beta_hi: 50.0,
            scan_points: 512,
            max_scan_points: 4096,
            newton_tol: 1e-13,
            max_iter: 100,
            junction_tol: 1e-12,
            moment_tol: 1e-8,
            consistency_tol: 1e-9,
            threads: None,
        }
    }
}

impl RootScanConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_lo < self.alpha_hi) || !(self.beta_hi > 0.0) {
            return Err(Error::InvalidInput(
                "scan bounds must satisfy lo < hi".into(),
            ));
        }
        if self.scan_points < 2 {
            return Err(Error::InvalidInput("scan_points must be at least 2".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidInput("threads must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triple_validation_and_count() {
        assert!(SupportTriple::new(2, 1, 3).is_err());
        assert!(SupportTriple::new(0, 1, 3).is_err());
        let t = SupportTriple::new(2, 4, 7).unwrap();
        assert_eq!((t.k_tilde(), t.l_tilde(), t.support_size()), (2, 3, 6));
        // C(n + 2, 3)
        assert_eq!(SupportTriple::enumerate(5).len(), 35);
        assert_eq!(SupportTriple::enumerate(11).len(), 286);
    }

    #[test]
    fn candidate_mass_layout() {
        let c = PiecewiseGeometricCandidate {
            triple: SupportTriple::new(2, 3, 5).unwrap(),
            alpha: Some((0.5f64).ln()),
            beta: Some((0.25f64).ln()),
            rho: 0.5,
            f_residual: 0.0,
            g_residual: 0.0,
        };
        let x = c.mass(6);
        let want = [0.0, 0.125, 0.5, 0.25, 0.125, 0.0];
        for (a, b) in x.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(c.junction_ok(0.0));
    }

    #[test]
    fn config_validation() {
        assert!(RootScanConfig::default().validate().is_ok());
        let bad = RootScanConfig {
            scan_points: 1,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
