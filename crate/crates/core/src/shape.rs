//! Shape-class predicates (log-concave, increasing failure rate, unimodal) and
//! the feasibility report used to gate every solver witness.

use serde::Serialize;

use crate::moment::{evaluate_moments, tail_transform, Distribution, Instance, MASS_TOL};

/// Default additive tolerance on the polynomial forms of the shape constraints.
pub const SHAPE_TOL: f64 = 1e-10;

/// Threshold below `x_j^2` that counts an LC constraint as strictly slack.
pub const SLACK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LcCheck {
    pub holds: bool,
    pub support_consecutive: bool,
    /// Largest `x_{j-1} x_{j+1} - x_j^2` over interior support points,
    /// clamped at zero.
    pub worst_violation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IfrCheck {
    pub holds: bool,
    /// Largest decrease `r_j - r_{j+1}` of the failure rate, clamped at zero.
    pub worst_violation: f64,
}

fn support_is_consecutive(mass: &[f64]) -> bool {
    match Distribution::from_raw(mass.to_vec()).support_bounds() {
        Some((lo, hi)) => mass[lo..=hi].iter().all(|&v| v > 0.0),
        None => false,
    }
}

pub fn is_log_concave(x: &Distribution, tol: f64) -> LcCheck {
    let mass = &x.mass;
    let consecutive = support_is_consecutive(mass);
    let mut worst = 0.0f64;
    if let Some((lo, hi)) = x.support_bounds() {
        for j in (lo + 1)..hi {
            worst = worst.max(mass[j - 1] * mass[j + 1] - mass[j] * mass[j]);
        }
    }
    LcCheck {
        holds: consecutive && worst <= tol,
        support_consecutive: consecutive,
        worst_violation: worst,
    }
}

/// The closed reformulation: `x_{j-u}^v x_{j+v}^u <= x_j^{u+v}` for every
/// interior `j` and every `u, v >= 1` that stay in range. Cubic in `n`.
pub fn is_lc_prime_feasible(x: &Distribution, tol: f64) -> bool {
    let mass = &x.mass;
    let n = mass.len();
    if mass.iter().any(|&v| v < 0.0) || mass.iter().all(|&v| v == 0.0) {
        return false;
    }
    for j in 1..n.saturating_sub(1) {
        for u in 1..=j {
            for v in 1..(n - j) {
                let lhs = mass[j - u].powi(v as i32) * mass[j + v].powi(u as i32);
                let rhs = mass[j].powi((u + v) as i32);
                if lhs > rhs + tol {
                    return false;
                }
            }
        }
    }
    true
}

/// Failure rates `r_j = x_j / y_j`, compared while the tail mass exceeds `tol`.
pub fn is_ifr(x: &Distribution, tol: f64) -> IfrCheck {
    let y = tail_transform(x);
    let nonnegative = x.mass.iter().all(|&v| v >= 0.0);
    let mut worst = 0.0f64;
    let mut prev: Option<f64> = None;
    for (j, &m) in x.mass.iter().enumerate() {
        let tail = y.tails[j];
        if tail <= tol {
            break;
        }
        let rate = m / tail;
        if let Some(p) = prev {
            worst = worst.max(p - rate);
        }
        prev = Some(rate);
    }
    IfrCheck {
        holds: nonnegative && prev.is_some() && worst <= tol,
        worst_violation: worst,
    }
}

/// IFR through log-concavity of the tail sequence.
pub fn is_ifr_via_tails(x: &Distribution, tol: f64) -> bool {
    if x.mass.iter().any(|&v| v < 0.0) || x.mass.iter().all(|&v| v == 0.0) {
        return false;
    }
    let y = tail_transform(x).tails;
    (1..y.len()).all(|j| {
        let next = y.get(j + 1).copied().unwrap_or(0.0);
        y[j] <= 0.0 || y[j - 1] * next <= y[j] * y[j] + tol
    })
}

/// Number of interior support points where the LC inequality holds with slack
/// larger than `SLACK_TOL`.
pub fn lc_slack_count(x: &Distribution) -> usize {
    let Some((lo, hi)) = x.support_bounds() else {
        return 0;
    };
    let m = &x.mass;
    ((lo + 1)..hi)
        .filter(|&j| m[j - 1] * m[j + 1] < m[j] * m[j] - SLACK_TOL)
        .count()
}

/// Strictly slack tail constraints inside the decreasing stretch, i.e. after
/// the all-one plateau and before the last positive tail.
pub fn tail_slack_count(x: &Distribution) -> usize {
    let y = tail_transform(x).tails;
    let plateau_end = y.iter().rposition(|&t| t >= 1.0 - 1e-12).unwrap_or(0);
    let Some(last) = y.iter().rposition(|&t| t > 0.0) else {
        return 0;
    };
    ((plateau_end + 1)..last)
        .filter(|&j| y[j - 1] * y[j + 1] < y[j] * y[j] - SLACK_TOL)
        .count()
}

/// Non-decreasing up to some mode, non-increasing afterwards.
pub fn is_unimodal(x: &Distribution, tol: f64) -> bool {
    let m = &x.mass;
    let mut descending = false;
    for w in m.windows(2) {
        if descending {
            if w[1] > w[0] + tol {
                return false;
            }
        } else if w[1] < w[0] - tol {
            descending = true;
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdicts {
    pub nonnegative: bool,
    pub normalized: bool,
    pub moments: bool,
    pub log_concave: bool,
    pub ifr: bool,
    pub unimodal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub moment_residuals: Vec<f64>,
    pub max_moment_residual: f64,
    pub min_mass: f64,
    pub empty_support: bool,
    pub support_consecutive: bool,
    pub lc_violation: f64,
    pub ifr_violation: f64,
    pub lc_slack_count: usize,
    pub tail_slack_count: usize,
    pub tolerance: f64,
    pub moment_tolerance: f64,
    pub verdicts: Verdicts,
    pub errors: Vec<String>,
}

impl FeasibilityReport {
    /// Moments match and the vector is a probability distribution.
    pub fn is_feasible(&self) -> bool {
        self.errors.is_empty()
            && self.verdicts.nonnegative
            && self.verdicts.normalized
            && self.verdicts.moments
    }
}

/// Tolerance on moment residuals used by the report verdicts.
pub const MOMENT_TOL: f64 = 1e-8;

pub fn feasibility_report(inst: &Instance, x: &Distribution, tol: f64) -> FeasibilityReport {
    let mut errors = Vec::new();
    if x.len() != inst.n() {
        errors.push(format!(
            "distribution has {} entries for {} support points",
            x.len(),
            inst.n()
        ));
        return FeasibilityReport {
            moment_residuals: Vec::new(),
            max_moment_residual: f64::INFINITY,
            min_mass: x.mass.iter().copied().fold(f64::INFINITY, f64::min),
            empty_support: x.support_bounds().is_none(),
            support_consecutive: false,
            lc_violation: f64::INFINITY,
            ifr_violation: f64::INFINITY,
            lc_slack_count: 0,
            tail_slack_count: 0,
            tolerance: tol,
            moment_tolerance: MOMENT_TOL,
            verdicts: Verdicts {
                nonnegative: false,
                normalized: false,
                moments: false,
                log_concave: false,
                ifr: false,
                unimodal: false,
            },
            errors,
        };
    }

    let empty_support = x.support_bounds().is_none();
    if empty_support {
        errors.push("distribution has empty support".into());
    }
    let order = inst.moments.order();
    let evaluated = evaluate_moments(&inst.space, x, order);
    let moment_residuals: Vec<f64> = evaluated
        .values()
        .iter()
        .zip(inst.moments.values())
        .map(|(a, b)| (a - b).abs())
        .collect();
    let max_moment_residual = moment_residuals.iter().copied().fold(0.0, f64::max);
    let min_mass = x.mass.iter().copied().fold(f64::INFINITY, f64::min);
    let lc = is_log_concave(x, tol);
    let ifr = is_ifr(x, tol);
    let nonnegative = min_mass >= -MASS_TOL;

    FeasibilityReport {
        verdicts: Verdicts {
            nonnegative,
            normalized: moment_residuals[0] <= MOMENT_TOL,
            moments: max_moment_residual <= MOMENT_TOL,
            log_concave: lc.holds,
            ifr: ifr.holds,
            unimodal: !empty_support && nonnegative && is_unimodal(x, tol),
        },
        moment_residuals,
        max_moment_residual,
        min_mass,
        empty_support,
        support_consecutive: lc.support_consecutive,
        lc_violation: lc.worst_violation,
        ifr_violation: ifr.worst_violation,
        lc_slack_count: lc_slack_count(x),
        tail_slack_count: tail_slack_count(x),
        tolerance: tol,
        moment_tolerance: MOMENT_TOL,
        errors,
    }
}
