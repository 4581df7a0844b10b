//! Solver for the two-moment problem over IFR distributions, posed on the
//! tail sequence `y_j = P(X >= w_j)`.
//!
//! An optimal tail sequence is an all-one plateau up to `j1`, a geometric
//! piece with ratio `r1` up to `v1`, a second geometric piece with ratio `r2`
//! and then zeros from `j2` on. Each index triple leaves two unknown ratios for
//! the two moment equations, which are solved by damped Newton in log space.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moment::{
    evaluate_objective, inverse_tail_transform, Distribution, Instance, MomentVector, SampleSpace,
    TailSequence,
};
use crate::numeric::{compensated_sum, newton_bisect};
use crate::result::{run_with_threads, select_best, BoundResult, CandidateInfo, Residuals, Shape};
use crate::shape::{feasibility_report, is_ifr_via_tails, FeasibilityReport, SHAPE_TOL};

/// Signed residuals `sum_j (w_j^i - w_{j-1}^i) y_j - q_i` for `i = 0..=m`,
/// with `w_0^i` taken as zero.
pub fn tail_moment_residuals(y: &TailSequence, space: &SampleSpace, q: &MomentVector) -> Vec<f64> {
    assert_eq!(y.len(), space.len(), "tail sequence length mismatch");
    let w = space.values();
    (0..=q.order())
        .map(|i| {
            let lhs = compensated_sum(w.iter().enumerate().map(|(j, &wj)| {
                let prev = if j == 0 { 0.0 } else { w[j - 1].powi(i as i32) };
                (wj.powi(i as i32) - prev) * y.tails[j]
            }));
            lhs - q.get(i)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IfrConfig {
    /// Starts per axis of the multistart grid over `(0, 1)^2`.
    pub multistart: usize,
    pub newton_tol: f64,
    pub max_iter: usize,
    /// Largest ratio allowed on a nonempty geometric piece.
    pub ratio_cap: f64,
    /// Smallest `log r` searched.
    pub log_ratio_floor: f64,
    pub moment_tol: f64,
    /// Tolerance on the moment equation left unused by one-piece tails.
    pub consistency_tol: f64,
    pub threads: Option<usize>,
}

impl Default for IfrConfig {
    fn default() -> Self {
        Self {
            multistart: 16,
            newton_tol: 1e-13,
            max_iter: 100,
            ratio_cap: 1.0 - 1e-12,
            log_ratio_floor: -60.0,
            moment_tol: 1e-8,
            consistency_tol: 1e-9,
            threads: None,
        }
    }
}

impl IfrConfig {
    pub fn validate(&self) -> Result<()> {
        if self.multistart == 0 {
            return Err(Error::InvalidInput("multistart must be positive".into()));
        }
        if !(self.ratio_cap > 0.0 && self.ratio_cap <= 1.0) {
            return Err(Error::InvalidInput("ratio_cap must lie in (0, 1]".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidInput("threads must be positive".into()));
        }
        Ok(())
    }
}

/// Plateau / two-ratio / zero tail structure. Indices are one-based with
/// `1 <= j1 <= v1 < j2 <= n + 1`; `j2` is the first zero tail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IfrCandidate {
    pub j1: usize,
    pub v1: usize,
    pub j2: usize,
    /// Ratio on `[j1, v1]`, `None` when that piece is empty.
    pub r1: Option<f64>,
    /// Ratio on `[v1, j2)`, `None` when that piece is empty.
    pub r2: Option<f64>,
    /// Signed tail moment residuals for `i = 0, 1, 2`.
    pub residuals: Vec<f64>,
}

fn build_tails(n: usize, j1: usize, v1: usize, j2: usize, s1: f64, s2: f64) -> Vec<f64> {
    (1..=n)
        .map(|j| {
            if j <= j1 {
                1.0
            } else if j <= v1 {
                (s1 * (j - j1) as f64).exp()
            } else if j < j2 {
                (s1 * (v1 - j1) as f64 + s2 * (j - v1) as f64).exp()
            } else {
                0.0
            }
        })
        .collect()
}

impl IfrCandidate {
    pub fn tails(&self, n: usize) -> TailSequence {
        let s1 = self.r1.map_or(0.0, f64::ln);
        let s2 = self.r2.map_or(0.0, f64::ln);
        TailSequence::from_raw(build_tails(n, self.j1, self.v1, self.j2, s1, s2))
    }
}

struct TailSystem<'a> {
    n: usize,
    j1: usize,
    v1: usize,
    j2: usize,
    space: &'a SampleSpace,
    q: &'a MomentVector,
}

impl TailSystem<'_> {
    fn residuals(&self, s1: f64, s2: f64) -> Vec<f64> {
        let y = TailSequence::from_raw(build_tails(self.n, self.j1, self.v1, self.j2, s1, s2));
        tail_moment_residuals(&y, self.space, self.q)
    }

    fn scale(&self, i: usize) -> f64 {
        1.0 + self.q.get(i).abs()
    }

    /// Scaled `(F1, F2)` for the first and second moment equations.
    fn eval2(&self, s1: f64, s2: f64) -> [f64; 2] {
        let r = self.residuals(s1, s2);
        [r[1] / self.scale(1), r[2] / self.scale(2)]
    }
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].abs().max(v[1].abs())
}

/// Damped Newton with a central-difference Jacobian. Returns the converged
/// `(s1, s2)` or `None`.
fn newton_2d(sys: &TailSystem<'_>, start: (f64, f64), cfg: &IfrConfig) -> Option<(f64, f64)> {
    let (lo, hi) = (cfg.log_ratio_floor, 1.0);
    let clamp = |v: f64| v.clamp(lo, hi);
    let (mut s1, mut s2) = start;
    let mut fx = sys.eval2(s1, s2);
    for _ in 0..cfg.max_iter {
        if norm(fx) <= cfg.newton_tol {
            return Some((s1, s2));
        }
        let h = 1e-7;
        let d1a = sys.eval2(s1 + h, s2);
        let d1b = sys.eval2(s1 - h, s2);
        let d2a = sys.eval2(s1, s2 + h);
        let d2b = sys.eval2(s1, s2 - h);
        let j11 = (d1a[0] - d1b[0]) / (2.0 * h);
        let j21 = (d1a[1] - d1b[1]) / (2.0 * h);
        let j12 = (d2a[0] - d2b[0]) / (2.0 * h);
        let j22 = (d2a[1] - d2b[1]) / (2.0 * h);
        let det = j11 * j22 - j12 * j21;
        if !det.is_finite() || det.abs() < 1e-300 {
            return None;
        }
        let step1 = -(j22 * fx[0] - j12 * fx[1]) / det;
        let step2 = -(-j21 * fx[0] + j11 * fx[1]) / det;
        let mut lambda = 1.0;
        let current = norm(fx);
        let mut accepted = false;
        for _ in 0..40 {
            let t1 = clamp(s1 + lambda * step1);
            let t2 = clamp(s2 + lambda * step2);
            let ft = sys.eval2(t1, t2);
            if norm(ft) < (1.0 - 1e-4 * lambda) * current {
                s1 = t1;
                s2 = t2;
                fx = ft;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (norm(fx) <= cfg.newton_tol.max(1e-11)).then_some((s1, s2))
}

/// One geometric stretch `y_j = r^{j - j1}` on `j1 <= j < j2`: the first moment
/// is increasing in `r`, so it pins `r` and the second is a consistency check.
fn one_piece_root(sys: &TailSystem<'_>, first_piece: bool, cfg: &IfrConfig) -> Option<f64> {
    let lift = |s: f64| if first_piece { (s, 0.0) } else { (0.0, s) };
    let len = (sys.j2 - 1 - sys.j1) as f64;
    let eval = |s: f64| {
        let (a, b) = lift(s);
        let y = build_tails(sys.n, sys.j1, sys.v1, sys.j2, a, b);
        let w = sys.space.values();
        let mut deriv = 0.0;
        for j in sys.j1..(sys.j2 - 1) {
            // zero-based index j is tail j + 1, `j + 1 - j1` steps into the piece
            let steps = (j + 1 - sys.j1) as f64;
            deriv += (w[j] - w[j - 1]) * steps * y[j];
        }
        (sys.residuals(a, b)[1], deriv)
    };
    let lo = cfg.log_ratio_floor.max(-700.0 / len);
    let hi = cfg.ratio_cap.ln();
    let (f_lo, f_hi) = (eval(lo).0, eval(hi).0);
    if f_lo > 0.0 || f_hi < 0.0 {
        return None;
    }
    let s = newton_bisect(eval, lo, hi, 1e-15, 200);
    Some(s)
}

/// All moment-matching tails with the structure `(j1, v1, j2)`.
pub fn solve_ifr_triple(
    j1: usize,
    v1: usize,
    j2: usize,
    inst: &Instance,
    cfg: &IfrConfig,
) -> Vec<IfrCandidate> {
    let n = inst.n();
    if !(1 <= j1 && j1 <= v1 && v1 < j2 && j2 <= n + 1) || inst.moments.order() != 2 {
        return Vec::new();
    }
    let sys = TailSystem {
        n,
        j1,
        v1,
        j2,
        space: &inst.space,
        q: &inst.moments,
    };
    let first = v1 > j1;
    let second = j2 - 1 > v1;
    let make = |s1: f64, s2: f64| {
        let r1 = first.then(|| s1.exp());
        let r2 = second.then(|| s2.exp());
        IfrCandidate {
            j1,
            v1,
            j2,
            r1,
            r2,
            residuals: sys.residuals(s1, s2),
        }
    };
    let consistent = |c: &IfrCandidate| c.residuals.iter().all(|r| r.abs() <= cfg.consistency_tol);

    match (first, second) {
        (false, false) => {
            let c = make(0.0, 0.0);
            if consistent(&c) {
                vec![c]
            } else {
                Vec::new()
            }
        }
        (true, false) | (false, true) => one_piece_root(&sys, first, cfg)
            .map(|s| if first { make(s, 0.0) } else { make(0.0, s) })
            .filter(consistent)
            .into_iter()
            .collect(),
        (true, true) => {
            let m = cfg.multistart;
            let mut roots: Vec<(f64, f64)> = Vec::new();
            for a in 0..m {
                for b in 0..m {
                    let r1 = (a as f64 + 0.5) / m as f64;
                    let r2 = (b as f64 + 0.5) / m as f64;
                    let Some((s1, s2)) = newton_2d(&sys, (r1.ln(), r2.ln()), cfg) else {
                        continue;
                    };
                    let (r1, r2) = (s1.exp(), s2.exp());
                    if r1 > cfg.ratio_cap || r2 > r1 * (1.0 + 1e-12) {
                        continue;
                    }
                    let dup = roots
                        .iter()
                        .any(|&(p, q)| (p - r1).abs() <= 1e-9 && (q - r2).abs() <= 1e-9);
                    if !dup {
                        roots.push((r1, r2));
                    }
                }
            }
            roots.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
            roots
                .into_iter()
                .map(|(r1, r2)| make(r1.ln(), r2.ln()))
                .collect()
        }
    }
}

/// Index triples `(j1, v1, j2)` over `n` support points in lexicographic order.
pub fn enumerate_ifr_triples(n: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for j1 in 1..=n {
        for v1 in j1..=n {
            for j2 in (v1 + 1)..=(n + 1) {
                out.push((j1, v1, j2));
            }
        }
    }
    out
}

struct IfrSolution {
    candidate: IfrCandidate,
    distribution: Distribution,
    objective: f64,
    report: FeasibilityReport,
}

fn verify(candidate: IfrCandidate, inst: &Instance, cfg: &IfrConfig) -> Option<IfrSolution> {
    let y = candidate.tails(inst.n());
    let distribution = inverse_tail_transform(&y).ok()?;
    let report = feasibility_report(inst, &distribution, SHAPE_TOL);
    let ok = report.errors.is_empty()
        && report.verdicts.nonnegative
        && report.max_moment_residual <= cfg.moment_tol
        && report.verdicts.ifr
        && is_ifr_via_tails(&distribution, SHAPE_TOL);
    if !ok {
        log::trace!(
            "rejected ifr ({}, {}, {}): residual {:.3e}",
            candidate.j1,
            candidate.v1,
            candidate.j2,
            report.max_moment_residual
        );
        return None;
    }
    let objective = evaluate_objective(&inst.objective, &inst.space, &distribution);
    Some(IfrSolution {
        candidate,
        distribution,
        objective,
        report,
    })
}

/// Global IFR bound: best verified tail structure over all index triples.
pub fn solve_ifr(inst: &Instance, cfg: &IfrConfig) -> Result<BoundResult> {
    cfg.validate()?;
    inst.require_two_moments()?;
    let triples = enumerate_ifr_triples(inst.n());
    let per_triple: Vec<Vec<IfrSolution>> = run_with_threads(cfg.threads, || {
        triples
            .par_iter()
            .map(|&(j1, v1, j2)| {
                solve_ifr_triple(j1, v1, j2, inst, cfg)
                    .into_iter()
                    .filter_map(|c| verify(c, inst, cfg))
                    .collect()
            })
            .collect()
    })?;
    let all: Vec<IfrSolution> = per_triple.into_iter().flatten().collect();
    let found = all.len();
    log::debug!("ifr: {} candidates over {} triples", found, triples.len());
    let key = |s: &IfrSolution| {
        let c = &s.candidate;
        ((c.j1, c.v1, c.j2), c.r1.unwrap_or(-1.0))
    };
    let best = select_best(
        all,
        inst.direction,
        |s| s.objective,
        |a, b| {
            let (ka, kb) = (key(a), key(b));
            ka.0.cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
        },
    )
    .ok_or_else(|| Error::Infeasible("no IFR candidate satisfies the moments".into()))?;

    let c = &best.candidate;
    Ok(BoundResult {
        shape: Shape::Ifr,
        direction: inst.direction,
        bound: best.objective,
        candidate: CandidateInfo::Ifr {
            j1: c.j1,
            v1: c.v1,
            j2: c.j2,
            r1: c.r1,
            r2: c.r2,
        },
        residuals: Residuals::from_report(&best.report),
        witness: best.distribution,
        triples_searched: triples.len(),
        candidates_found: found,
    })
}
