//! Reduction of a fixed support triple to one equation in one unknown.
//!
//! With the breakpoint mass `rho`, left ratio `e^{-beta}` and right ratio
//! `e^{alpha}`, the standardized zeroth/first/second moment conditions become
//!
//! ```text
//! f(alpha, beta) = sum_j e^{beta j} cl_j + sum_j e^{alpha j} cr_j + a           = 0
//! g(alpha, beta) = sum_j e^{beta j} (1 - cl_j^2) + sum_j e^{alpha j} (1 - cr_j^2)
//!                  + 1 - a^2                                                    = 0
//! ```
//!
//! where `cl_j` / `cr_j` are the standardized support values `j` steps left /
//! right of the breakpoint (value `a`). On an evenly spaced grid these are
//! `a - j eps` and `a + j eps`. `f` decreases in `beta` once `beta >= beta0`,
//! so `f = 0` defines `beta = h(alpha)` and the common roots are the roots of
//! `g(alpha, h(alpha))`.

use super::polynomial::MonotonePolynomial;
use super::RootScanConfig;
use crate::moment::StandardizedSpace;
use crate::numeric::newton_bisect;

/// Largest exponent `alpha * j` we let the sums reach.
pub const EXP_CAP: f64 = 600.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    /// Standardized value at the breakpoint.
    pub a: f64,
    /// `cl_j` for `j = 1..=k_tilde`.
    pub left: Vec<f64>,
    /// `cr_j` for `j = 1..=l_tilde`.
    pub right: Vec<f64>,
}

/// Weighted exponential sums of one piece: `sum e^{t j} c_j^p` and
/// `sum j e^{t j} c_j^p` for `p = 0, 1, 2`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PieceSums {
    pub s: [f64; 3],
    pub ds: [f64; 3],
}

fn piece_sums(coeffs: &[f64], t: f64) -> PieceSums {
    let mut out = PieceSums::default();
    for (idx, &c) in coeffs.iter().enumerate() {
        let j = (idx + 1) as f64;
        let e = (t * j).exp();
        let terms = [e, e * c, e * c * c];
        for p in 0..3 {
            out.s[p] += terms[p];
            out.ds[p] += j * terms[p];
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Partials {
    pub f: f64,
    pub g: f64,
    pub f_alpha: f64,
    pub f_beta: f64,
    pub g_alpha: f64,
    pub g_beta: f64,
    /// `1 / rho`: total unnormalized mass.
    pub mass: f64,
}

impl Reduction {
    /// Evenly spaced support with spacing `eps` in standardized units.
    pub fn uniform(k_tilde: usize, l_tilde: usize, a: f64, eps: f64) -> Self {
        Self {
            a,
            left: (1..=k_tilde).map(|j| a - j as f64 * eps).collect(),
            right: (1..=l_tilde).map(|j| a + j as f64 * eps).collect(),
        }
    }

    /// Coefficients read off a standardized space for a zero-based triple.
    pub fn from_space(space: &StandardizedSpace, k: usize, v1: usize, ell: usize) -> Self {
        assert!(k <= v1 && v1 <= ell && ell < space.len());
        Self {
            a: space.at(v1),
            left: (1..=(v1 - k)).map(|j| space.at(v1 - j)).collect(),
            right: (1..=(ell - v1)).map(|j| space.at(v1 + j)).collect(),
        }
    }

    pub fn k_tilde(&self) -> usize {
        self.left.len()
    }

    pub fn l_tilde(&self) -> usize {
        self.right.len()
    }

    pub fn partials(&self, alpha: f64, beta: f64) -> Partials {
        let l = piece_sums(&self.left, beta);
        let r = piece_sums(&self.right, alpha);
        let a = self.a;
        Partials {
            f: l.s[1] + r.s[1] + a,
            g: (l.s[0] - l.s[2]) + (r.s[0] - r.s[2]) + 1.0 - a * a,
            f_alpha: r.ds[1],
            f_beta: l.ds[1],
            g_alpha: r.ds[0] - r.ds[2],
            g_beta: l.ds[0] - l.ds[2],
            mass: l.s[0] + r.s[0] + 1.0,
        }
    }

    pub fn f(&self, alpha: f64, beta: f64) -> f64 {
        piece_sums(&self.left, beta).s[1] + piece_sums(&self.right, alpha).s[1] + self.a
    }

    pub fn g(&self, alpha: f64, beta: f64) -> f64 {
        self.partials(alpha, beta).g
    }

    /// Breakpoint mass `rho = 1 / (sum e^{beta j} + sum e^{alpha j} + 1)`.
    pub fn rho(&self, alpha: f64, beta: f64) -> f64 {
        1.0 / self.partials(alpha, beta).mass
    }

    /// `alpha0`: log of the positive root of `sum_j z^j cr_j`, or `-inf`.
    pub fn alpha0(&self) -> f64 {
        MonotonePolynomial::consecutive(self.right.clone())
            .ok()
            .and_then(|p| p.unique_positive_log_root())
            .unwrap_or(f64::NEG_INFINITY)
    }

    /// `beta0`: log of the positive root of `-sum_j z^j cl_j`, or `-inf`.
    pub fn beta0(&self) -> f64 {
        MonotonePolynomial::consecutive(self.left.iter().map(|c| -c).collect())
            .ok()
            .and_then(|p| p.unique_positive_log_root())
            .unwrap_or(f64::NEG_INFINITY)
    }

    /// Search interval for `alpha` (right ratio).
    pub fn alpha_range(&self, cfg: &RootScanConfig) -> (f64, f64) {
        let hi = cfg.alpha_hi.min(EXP_CAP / self.l_tilde().max(1) as f64);
        (self.alpha0().max(cfg.alpha_lo), hi)
    }

    /// Search interval for `beta` (left ratio).
    pub fn beta_range(&self, cfg: &RootScanConfig) -> (f64, f64) {
        let hi = cfg.beta_hi.min(EXP_CAP / self.k_tilde().max(1) as f64);
        (self.beta0().max(-cfg.beta_hi), hi)
    }

    /// `h(alpha)`: the `beta` solving `f(alpha, beta) = 0` on the monotone
    /// range, when `f` changes sign there.
    pub fn h(&self, alpha: f64, cfg: &RootScanConfig) -> Option<f64> {
        if self.k_tilde() == 0 {
            return None;
        }
        let (lo, hi) = self.beta_range(cfg);
        if !(lo < hi) {
            return None;
        }
        let right = piece_sums(&self.right, alpha).s[1] + self.a;
        let eval = |beta: f64| {
            let l = piece_sums(&self.left, beta);
            (l.s[1] + right, l.ds[1])
        };
        let (f_lo, _) = eval(lo);
        let (f_hi, _) = eval(hi);
        if f_lo == 0.0 {
            return Some(lo);
        }
        if f_hi == 0.0 {
            return Some(hi);
        }
        if f_lo.signum() == f_hi.signum() {
            return None;
        }
        Some(newton_bisect(eval, lo, hi, cfg.newton_tol, cfg.max_iter))
    }

    /// `g(alpha, h(alpha))` with its total derivative
    /// `g_alpha + g_beta * (-f_alpha / f_beta)`.
    pub fn g_along_h(&self, alpha: f64, cfg: &RootScanConfig) -> Option<(f64, f64, f64)> {
        let beta = self.h(alpha, cfg)?;
        let p = self.partials(alpha, beta);
        let dg = p.g_alpha + p.g_beta * (-p.f_alpha / p.f_beta);
        Some((beta, p.g, dg))
    }
}

/// `(alpha0, beta0)` on an evenly spaced grid.
pub fn alpha0_beta0(k_tilde: usize, l_tilde: usize, a: f64, eps: f64) -> (f64, f64) {
    let r = Reduction::uniform(k_tilde, l_tilde, a, eps);
    (r.alpha0(), r.beta0())
}

pub fn h_of_alpha(
    alpha: f64,
    k_tilde: usize,
    l_tilde: usize,
    a: f64,
    eps: f64,
    cfg: &RootScanConfig,
) -> Option<f64> {
    Reduction::uniform(k_tilde, l_tilde, a, eps).h(alpha, cfg)
}

pub fn g_residual(alpha: f64, beta: f64, k_tilde: usize, l_tilde: usize, a: f64, eps: f64) -> f64 {
    Reduction::uniform(k_tilde, l_tilde, a, eps).g(alpha, beta)
}
