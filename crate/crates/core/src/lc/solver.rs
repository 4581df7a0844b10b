use rayon::prelude::*;

use super::reduction::Reduction;
use super::{PiecewiseGeometricCandidate, RootScanConfig, SupportTriple};
use crate::error::{Error, Result};
use crate::moment::{evaluate_objective, standardize, Distribution, Instance, StandardizedSpace};
use crate::numeric::{bisect, newton_bisect};
use crate::result::{run_with_threads, select_best, BoundResult, CandidateInfo, Residuals, Shape};
use crate::shape::{feasibility_report, FeasibilityReport, SHAPE_TOL};

/// A verified candidate for one support triple.
#[derive(Debug, Clone)]
pub struct SupportSolution {
    pub candidate: PiecewiseGeometricCandidate,
    pub distribution: Distribution,
    pub objective: f64,
    pub report: FeasibilityReport,
}

/// `beta = h(alpha)` clamped to the search interval, so it is defined on the
/// whole scan range even where rounding puts the root just outside.
fn clamped_beta(red: &Reduction, alpha: f64, blo: f64, bhi: f64, cfg: &RootScanConfig) -> f64 {
    let f_lo = red.f(alpha, blo);
    if f_lo <= 0.0 {
        return blo;
    }
    let f_hi = red.f(alpha, bhi);
    if f_hi >= 0.0 {
        return bhi;
    }
    red.h(alpha, cfg).unwrap_or(blo)
}

/// `G(alpha) = g(alpha, h(alpha))` and its derivative, scaled by `rho` so the
/// value reads as a second-moment residual.
fn scaled_g(red: &Reduction, alpha: f64, blo: f64, bhi: f64, cfg: &RootScanConfig) -> (f64, f64) {
    let beta = clamped_beta(red, alpha, blo, bhi, cfg);
    let p = red.partials(alpha, beta);
    let dg = if p.f_beta != 0.0 {
        p.g_alpha + p.g_beta * (-p.f_alpha / p.f_beta)
    } else {
        p.g_alpha
    };
    // Newton only needs the ratio g / g', so a common positive factor is fine
    // as long as it is frozen per evaluation.
    (p.g / p.mass, dg / p.mass)
}

/// Interval of `alpha` on which `h` exists: `f(alpha, blo) >= 0 >= f(alpha, bhi)`.
fn h_domain(red: &Reduction, alo: f64, ahi: f64, blo: f64, bhi: f64) -> Option<(f64, f64)> {
    let tol = 1e-15;
    let lower = |alpha: f64| red.f(alpha, blo);
    let upper = |alpha: f64| red.f(alpha, bhi);
    let amin = if lower(alo) >= 0.0 {
        alo
    } else if lower(ahi) < 0.0 {
        return None;
    } else {
        bisect(lower, alo, ahi, tol, 200)
    };
    let amax = if upper(ahi) <= 0.0 {
        ahi
    } else if upper(alo) > 0.0 {
        return None;
    } else {
        bisect(upper, alo, ahi, tol, 200)
    };
    (amin <= amax).then_some((amin, amax))
}

fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| {
            if i + 1 == points {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (points - 1) as f64
            }
        })
        .collect()
}

/// Interior local minima of `|G|` deep enough that a pair of roots could hide
/// inside the adjacent brackets.
fn suspicious_dips(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| {
            let (l, m, r) = (values[i - 1], values[i], values[i + 1]);
            l.signum() == m.signum()
                && m.signum() == r.signum()
                && m.abs() < l.abs()
                && m.abs() <= r.abs()
                && m.abs() < (m - l).abs().max((r - m).abs())
        })
        .collect()
}

/// Golden-section search for the point of `[lo, hi]` where `sign * G` is
/// smallest.
fn golden_min<F: Fn(f64) -> f64>(g: F, sign: f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut g1 = sign * g(x1);
    let mut g2 = sign * g(x2);
    for _ in 0..100 {
        if g1 < 0.0 {
            return (x1, g1 * sign);
        }
        if g2 < 0.0 {
            return (x2, g2 * sign);
        }
        if hi - lo < 1e-14 * (1.0 + lo.abs()) {
            break;
        }
        if g1 < g2 {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - phi * (hi - lo);
            g1 = sign * g(x1);
        } else {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + phi * (hi - lo);
            g2 = sign * g(x2);
        }
    }
    if g1 < g2 {
        (x1, g1 * sign)
    } else {
        (x2, g2 * sign)
    }
}

/// All roots of `g(alpha, h(alpha))` for a two-piece triple (`k < v1 < ell`),
/// filtered by junction log-concavity.
pub fn find_candidate_roots(
    triple: SupportTriple,
    space: &StandardizedSpace,
    cfg: &RootScanConfig,
) -> Vec<PiecewiseGeometricCandidate> {
    if triple.k_tilde() == 0 || triple.l_tilde() == 0 || triple.ell > space.len() {
        return Vec::new();
    }
    let red = Reduction::from_space(space, triple.k - 1, triple.v1 - 1, triple.ell - 1);
    // support entirely on one side of the mean cannot have unit variance
    if space.at(triple.k - 1) >= 0.0 || space.at(triple.ell - 1) <= 0.0 {
        return Vec::new();
    }
    let (alo, ahi) = red.alpha_range(cfg);
    let (blo, bhi) = red.beta_range(cfg);
    if !(alo < ahi && blo < bhi) {
        return Vec::new();
    }
    let Some((amin, amax)) = h_domain(&red, alo, ahi, blo, bhi) else {
        return Vec::new();
    };

    let eval = |alpha: f64| scaled_g(&red, alpha, blo, bhi, cfg);
    let mut roots: Vec<f64> = Vec::new();
    if amin == amax {
        if eval(amin).0.abs() <= cfg.consistency_tol {
            roots.push(amin);
        }
    } else {
        let mut points = cfg.scan_points.max(2);
        let (alphas, values) = loop {
            let alphas = grid(amin, amax, points);
            let values: Vec<f64> = alphas.iter().map(|&a| eval(a).0).collect();
            let dips = suspicious_dips(&values);
            if dips.is_empty() || points * 2 > cfg.max_scan_points.max(cfg.scan_points) {
                break (alphas, values);
            }
            points *= 2;
        };

        let mut brackets: Vec<(f64, f64)> = Vec::new();
        for i in 0..alphas.len() {
            if values[i] == 0.0 {
                roots.push(alphas[i]);
            } else if i + 1 < alphas.len()
                && values[i + 1] != 0.0
                && values[i].signum() != values[i + 1].signum()
            {
                brackets.push((alphas[i], alphas[i + 1]));
            }
        }
        for i in suspicious_dips(&values) {
            let sign = values[i].signum();
            let (x, gx) = golden_min(|a| eval(a).0, sign, alphas[i - 1], alphas[i + 1]);
            if gx.signum() != sign {
                brackets.push((alphas[i - 1], x));
                brackets.push((x, alphas[i + 1]));
            } else if gx.abs() <= cfg.consistency_tol {
                roots.push(x);
            }
        }
        for (lo, hi) in brackets {
            roots.push(newton_bisect(
                eval,
                lo,
                hi,
                cfg.newton_tol * 1e-2,
                cfg.max_iter,
            ));
        }
    }

    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-10 * (1.0 + b.abs()));

    roots
        .into_iter()
        .filter_map(|alpha| {
            let beta = red
                .h(alpha, cfg)
                .unwrap_or_else(|| clamped_beta(&red, alpha, blo, bhi, cfg));
            let p = red.partials(alpha, beta);
            let rho = 1.0 / p.mass;
            let cand = PiecewiseGeometricCandidate {
                triple,
                alpha: Some(alpha),
                beta: Some(beta),
                rho,
                f_residual: (p.f * rho).abs(),
                g_residual: (p.g * rho).abs(),
            };
            cand.junction_ok(cfg.junction_tol).then_some(cand)
        })
        .collect()
}

/// Single geometric piece (`v1 = k` or `v1 = ell`): the first-moment equation
/// fixes the ratio, the second-moment equation must then hold on its own.
fn single_piece_roots(
    triple: SupportTriple,
    space: &StandardizedSpace,
    cfg: &RootScanConfig,
) -> Vec<PiecewiseGeometricCandidate> {
    let red = Reduction::from_space(space, triple.k - 1, triple.v1 - 1, triple.ell - 1);
    let right_piece = triple.k_tilde() == 0;
    let (lo, hi) = if right_piece {
        red.alpha_range(cfg)
    } else {
        red.beta_range(cfg)
    };
    if !(lo < hi) {
        return Vec::new();
    }
    // f as a function of the one live ratio; monotone on [lo, hi]
    let f_of = |t: f64| {
        let p = if right_piece {
            red.partials(t, 0.0)
        } else {
            red.partials(0.0, t)
        };
        if right_piece {
            (p.f, p.f_alpha)
        } else {
            (p.f, p.f_beta)
        }
    };
    let (f_lo, f_hi) = (f_of(lo).0, f_of(hi).0);
    let t = if f_lo == 0.0 {
        lo
    } else if f_hi == 0.0 {
        hi
    } else if f_lo.signum() != f_hi.signum() {
        newton_bisect(f_of, lo, hi, cfg.newton_tol * 1e-2, cfg.max_iter)
    } else {
        return Vec::new();
    };
    let p = if right_piece {
        red.partials(t, 0.0)
    } else {
        red.partials(0.0, t)
    };
    let rho = 1.0 / p.mass;
    if (p.g * rho).abs() > cfg.consistency_tol {
        return Vec::new();
    }
    vec![PiecewiseGeometricCandidate {
        triple,
        alpha: right_piece.then_some(t),
        beta: (!right_piece).then_some(t),
        rho,
        f_residual: (p.f * rho).abs(),
        g_residual: (p.g * rho).abs(),
    }]
}

/// Supports of at most three points: the moment equations are a square (or
/// overdetermined) Vandermonde system in the masses themselves.
fn tiny_support(
    triple: SupportTriple,
    inst: &Instance,
    cfg: &RootScanConfig,
) -> Vec<PiecewiseGeometricCandidate> {
    let w = inst.space.values();
    let q = inst.moments.values();
    let idx: Vec<usize> = ((triple.k - 1)..triple.ell).collect();
    let masses: Vec<f64> = match idx.len() {
        1 => vec![1.0],
        2 => {
            let (a, b) = (w[idx[0]], w[idx[1]]);
            let xb = (q[1] - a) / (b - a);
            vec![1.0 - xb, xb]
        }
        3 => {
            let (a, b, c) = (w[idx[0]], w[idx[1]], w[idx[2]]);
            // Lagrange form of the inverse Vandermonde: x_i = E[prod_{j != i} (X - w_j)] / prod (w_i - w_j)
            let basis =
                |p: f64, r: f64, s: f64| (q[2] - (r + s) * q[1] + r * s) / ((p - r) * (p - s));
            vec![basis(a, b, c), basis(b, a, c), basis(c, a, b)]
        }
        _ => return Vec::new(),
    };
    if masses.iter().any(|&m| !(m > 0.0)) {
        return Vec::new();
    }
    // moment equations beyond the ones used to solve for the masses
    let used = idx.len();
    for (i, &qi) in q.iter().enumerate().skip(used) {
        let val: f64 = idx
            .iter()
            .zip(&masses)
            .map(|(&j, &m)| w[j].powi(i as i32) * m)
            .sum();
        if (val - qi).abs() > cfg.consistency_tol {
            return Vec::new();
        }
    }
    let v = triple.v1 - triple.k;
    let rho = masses[v];
    let alpha = (v + 1 < masses.len()).then(|| (masses[v + 1] / rho).ln());
    let beta = (v > 0).then(|| (masses[v - 1] / rho).ln());
    let cand = PiecewiseGeometricCandidate {
        triple,
        alpha,
        beta,
        rho,
        f_residual: 0.0,
        g_residual: 0.0,
    };
    if cand.junction_ok(cfg.junction_tol) {
        vec![cand]
    } else {
        Vec::new()
    }
}

/// Canonical breakpoint for supports of at most three points, which are
/// solved once per `(k, ell)`.
fn canonical_tiny_breakpoint(k: usize, ell: usize) -> usize {
    if ell - k == 2 {
        k + 1
    } else {
        k
    }
}

/// Every verified candidate with support triple `triple`.
pub fn solve_support(
    triple: SupportTriple,
    inst: &Instance,
    cfg: &RootScanConfig,
) -> Vec<SupportSolution> {
    if triple.ell > inst.n() {
        return Vec::new();
    }
    let candidates = if triple.support_size() <= 3 {
        if triple.v1 != canonical_tiny_breakpoint(triple.k, triple.ell) {
            return Vec::new();
        }
        tiny_support(triple, inst, cfg)
    } else {
        let Ok(space) = standardize(&inst.space, &inst.moments) else {
            return Vec::new();
        };
        if triple.k_tilde() == 0 || triple.l_tilde() == 0 {
            single_piece_roots(triple, &space, cfg)
        } else {
            find_candidate_roots(triple, &space, cfg)
        }
    };
    candidates
        .into_iter()
        .filter_map(|candidate| {
            let distribution = Distribution::from_raw(candidate.mass(inst.n()));
            let report = feasibility_report(inst, &distribution, SHAPE_TOL);
            let ok = report.errors.is_empty()
                && report.verdicts.nonnegative
                && report.max_moment_residual <= cfg.moment_tol
                && report.verdicts.log_concave;
            if !ok {
                log::trace!(
                    "rejected {:?}: residual {:.3e}",
                    candidate.triple,
                    report.max_moment_residual
                );
                return None;
            }
            let objective = evaluate_objective(&inst.objective, &inst.space, &distribution);
            Some(SupportSolution {
                candidate,
                distribution,
                objective,
                report,
            })
        })
        .collect()
}

fn tie_key(s: &SupportSolution) -> (SupportTriple, f64) {
    (
        s.candidate.triple,
        s.candidate.alpha.unwrap_or(f64::NEG_INFINITY),
    )
}

/// Global LC bound: best verified candidate over all support triples.
pub fn solve_lc(inst: &Instance, cfg: &RootScanConfig) -> Result<BoundResult> {
    cfg.validate()?;
    inst.require_two_moments()?;
    let triples = SupportTriple::enumerate(inst.n());
    let per_triple: Vec<Vec<SupportSolution>> = run_with_threads(cfg.threads, || {
        triples
            .par_iter()
            .map(|&t| solve_support(t, inst, cfg))
            .collect()
    })?;
    let all: Vec<SupportSolution> = per_triple.into_iter().flatten().collect();
    let found = all.len();
    log::debug!("lc: {} candidates over {} triples", found, triples.len());
    let best = select_best(
        all,
        inst.direction,
        |s| s.objective,
        |a, b| {
            let (ka, kb) = (tie_key(a), tie_key(b));
            ka.0.cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
        },
    )
    .ok_or_else(|| Error::Infeasible("no log-concave candidate satisfies the moments".into()))?;

    let c = &best.candidate;
    let mut residuals = Residuals::from_report(&best.report);
    residuals.f = Some(c.f_residual);
    residuals.g = Some(c.g_residual);
    Ok(BoundResult {
        shape: Shape::Lc,
        direction: inst.direction,
        bound: best.objective,
        candidate: CandidateInfo::Lc {
            k: c.triple.k,
            v1: c.triple.v1,
            ell: c.triple.ell,
            alpha: c.alpha,
            beta: c.beta,
            rho: c.rho,
        },
        witness: best.distribution,
        residuals,
        triples_searched: triples.len(),
        candidates_found: found,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moment::{Direction, MomentVector, ObjectiveSpec, SampleSpace};

    fn table_row(n: usize, s1: f64, s2: f64, dir: Direction) -> Instance {
        Instance::binomial_tail(n, s1, s2, dir).unwrap()
    }

    #[test]
    fn point_mass_support() {
        let inst = Instance::new(
            SampleSpace::natural(5),
            MomentVector::two(2.0, 4.0).unwrap(),
            ObjectiveSpec::TailGeq { threshold: 1.0 },
            Direction::Max,
        )
        .unwrap();
        let sols = solve_support(
            SupportTriple::new(3, 3, 3).unwrap(),
            &inst,
            &RootScanConfig::default(),
        );
        assert_eq!(sols.len(), 1);
        assert_eq!(sols[0].distribution.mass, vec![0.0, 0.0, 1.0, 0.0, 0.0]);
        let none = solve_support(
            SupportTriple::new(2, 2, 2).unwrap(),
            &inst,
            &RootScanConfig::default(),
        );
        assert!(none.is_empty());
    }

    #[test]
    fn two_point_support_consistency() {
        // uniform on {1, 2}: mean 1.5, second moment 2.5
        let inst = Instance::new(
            SampleSpace::natural(4),
            MomentVector::two(1.5, 2.5).unwrap(),
            ObjectiveSpec::TailGeq { threshold: 1.0 },
            Direction::Max,
        )
        .unwrap();
        let cfg = RootScanConfig::default();
        let sols = solve_support(SupportTriple::new(2, 2, 3).unwrap(), &inst, &cfg);
        assert_eq!(sols.len(), 1);
        assert!((sols[0].distribution.mass[1] - 0.5).abs() < 1e-15);
        // same mean, wrong support: third equation fails
        assert!(solve_support(SupportTriple::new(1, 1, 2).unwrap(), &inst, &cfg).is_empty());
        // non-canonical breakpoint is skipped
        assert!(solve_support(SupportTriple::new(2, 3, 3).unwrap(), &inst, &cfg).is_empty());
    }

    #[test]
    fn candidates_satisfy_reduced_equations() {
        let inst = table_row(5, 1.9, 1.3, Direction::Min);
        let space = standardize(&inst.space, &inst.moments).unwrap();
        let cfg = RootScanConfig::default();
        let mut total = 0;
        for t in SupportTriple::enumerate(5) {
            for c in find_candidate_roots(t, &space, &cfg) {
                total += 1;
                assert!(c.f_residual < 1e-10, "{c:?}");
                assert!(c.g_residual < 1e-10, "{c:?}");
                assert!(c.alpha.unwrap() + c.beta.unwrap() <= 1e-12);
            }
        }
        assert!(total > 0);
    }

    #[test]
    fn far_outside_support_is_empty() {
        // mean 20 on 0..4: every triple sits left of the mean
        let inst = Instance::new(
            SampleSpace::natural(5),
            MomentVector::two(20.0, 401.0).unwrap(),
            ObjectiveSpec::TailGeq { threshold: 1.0 },
            Direction::Max,
        )
        .unwrap();
        let space = standardize(&inst.space, &inst.moments).unwrap();
        for t in SupportTriple::enumerate(5) {
            assert!(find_candidate_roots(t, &space, &RootScanConfig::default()).is_empty());
        }
        assert!(matches!(
            solve_lc(&inst, &RootScanConfig::default()),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn first_table_row_min() {
        let r = solve_lc(
            &table_row(5, 1.9, 1.3, Direction::Min),
            &RootScanConfig::default(),
        )
        .unwrap();
        assert!((r.bound - 0.9).abs() < 5e-4, "{}", r.bound);
        let r = solve_lc(
            &table_row(5, 1.9, 1.3, Direction::Max),
            &RootScanConfig::default(),
        )
        .unwrap();
        assert!((r.bound - 1.0).abs() < 5e-4, "{}", r.bound);
    }
}
