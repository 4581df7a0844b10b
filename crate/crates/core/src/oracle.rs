//! Brute-force certifiers that share nothing with the solvers beyond the
//! moment and shape primitives.
//!
//! `grid_search_lc` and `grid_search_ifr` tabulate the squared moment misfit
//! on a dense parameter grid for every support structure, polish the best
//! local minima by compass search and keep whatever verifies.
//! `random_feasible_probe` draws random shaped distributions and tilts them
//! onto the moment constraints, giving feasible points that no bound may beat.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moment::{
    evaluate_objective, inverse_tail_transform, standardize, Distribution, Instance, TailSequence,
};
use crate::result::{run_with_threads, BoundResult, Shape};
use crate::shape::{feasibility_report, is_ifr, is_log_concave};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub step: f64,
    /// Local minima polished per support structure.
    pub minima_kept: usize,
    /// Misfit evaluations allowed per compass refinement.
    pub refine_evals: usize,
    /// Moment residual a candidate must meet.
    pub feas_tol: f64,
    /// Shape tolerance used when verifying candidates.
    pub shape_tol: f64,
    pub threads: Option<usize>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            grid_lo: -10.0,
            grid_hi: 10.0,
            step: 0.02,
            minima_kept: 5,
            refine_evals: 20_000,
            feas_tol: 1e-6,
            shape_tol: 1e-9,
            threads: None,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !(self.grid_lo < self.grid_hi) {
            return Err(Error::InvalidInput(
                "oracle grid needs step > 0 and lo < hi".into(),
            ));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidInput("threads must be positive".into()));
        }
        Ok(())
    }

    fn axis(&self, lo: f64, hi: f64) -> Vec<f64> {
        let count = ((hi - lo) / self.step).round() as usize;
        (0..=count).map(|i| lo + i as f64 * self.step).collect()
    }
}

/// Best verified point found by a grid search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleHit {
    pub distribution: Distribution,
    pub objective: f64,
    /// Support structure, `(k, v1, ell)` or `(j1, v1, j2)`, one-based.
    pub structure: (usize, usize, usize),
    pub residual: f64,
}

/// Grid cells that are no worse than any of their (up to eight) neighbours,
/// best `keep` first.
fn local_minima(values: &[f64], rows: usize, cols: usize, keep: usize) -> Vec<(usize, usize)> {
    let at = |i: usize, j: usize| values[i * cols + j];
    let mut found = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            let v = at(i, j);
            if !v.is_finite() {
                continue;
            }
            let mut minimal = true;
            'nb: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if a < 0 || b < 0 || a >= rows as i64 || b >= cols as i64 {
                        continue;
                    }
                    if at(a as usize, b as usize) < v {
                        minimal = false;
                        break 'nb;
                    }
                }
            }
            if minimal {
                found.push((v, i, j));
            }
        }
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    found
        .into_iter()
        .take(keep)
        .map(|(_, i, j)| (i, j))
        .collect()
}

/// Compass search over the axis and diagonal directions: move on the first
/// improving probe and double the step, halve the step when none improves.
fn compass<F: Fn(f64, f64) -> f64>(
    phi: F,
    start: (f64, f64),
    step: f64,
    evals: usize,
    axes: usize,
) -> (f64, f64) {
    const PLANE: [(f64, f64); 8] = [
        (1.0, 0.0),
        (-1.0, 0.0),
        (0.0, 1.0),
        (0.0, -1.0),
        (1.0, 1.0),
        (-1.0, -1.0),
        (1.0, -1.0),
        (-1.0, 1.0),
    ];
    let probes: &[(f64, f64)] = if axes == 2 { &PLANE } else { &PLANE[..2] };
    let (mut x, mut y) = start;
    let mut best = phi(x, y);
    let mut h = step;
    let mut used = 1;
    let mut last: Option<usize> = None;
    while used < evals && h > 1e-15 && best > 0.0 {
        let mut moved = None;
        // retry the last successful direction first
        let order = last
            .into_iter()
            .chain((0..probes.len()).filter(|&d| Some(d) != last));
        for d in order {
            let (dx, dy) = probes[d];
            let (tx, ty) = (x + dx * h, y + dy * h);
            let v = phi(tx, ty);
            used += 1;
            if v < best {
                best = v;
                x = tx;
                y = ty;
                moved = Some(d);
                break;
            }
        }
        match moved {
            Some(d) => {
                last = Some(d);
                h = (2.0 * h).min(step);
            }
            None => {
                last = None;
                h *= 0.5;
            }
        }
    }
    (x, y)
}

fn better(direction: crate::moment::Direction, a: &OracleHit, b: &OracleHit) -> bool {
    if (a.objective - b.objective).abs() <= 1e-12 {
        return a.structure < b.structure;
    }
    direction.better(a.objective, b.objective)
}

fn best_hit(direction: crate::moment::Direction, hits: Vec<OracleHit>) -> Option<OracleHit> {
    hits.into_iter().fold(None, |acc, h| match acc {
        None => Some(h),
        Some(cur) => Some(if better(direction, &h, &cur) { h } else { cur }),
    })
}

/// Exponential sums `(sum e^{t j}, sum e^{t j} c_j, sum e^{t j} c_j^2)`.
fn exp_sums(t: f64, coeffs: &[f64]) -> [f64; 3] {
    let mut s = [0.0; 3];
    for (idx, &c) in coeffs.iter().enumerate() {
        let e = (t * (idx + 1) as f64).exp();
        s[0] += e;
        s[1] += e * c;
        s[2] += e * c * c;
    }
    s
}

/// Squared misfit of the normalized standardized moments (mean 0, second 1).
fn lc_misfit(a: f64, left: [f64; 3], right: [f64; 3]) -> f64 {
    let total = 1.0 + left[0] + right[0];
    let mean = (a + left[1] + right[1]) / total;
    let second = (a * a + left[2] + right[2]) / total;
    mean * mean + (second - 1.0) * (second - 1.0)
}

fn lc_mass(n: usize, k: usize, v1: usize, ell: usize, alpha: f64, beta: f64) -> Vec<f64> {
    let mut u = vec![0.0; n];
    u[v1] = 1.0;
    for j in 1..=(v1 - k) {
        u[v1 - j] = (beta * j as f64).exp();
    }
    for j in 1..=(ell - v1) {
        u[v1 + j] = (alpha * j as f64).exp();
    }
    let total: f64 = u.iter().sum();
    u.iter().map(|v| v / total).collect()
}

fn lc_triple(
    inst: &Instance,
    wp: &[f64],
    (k, v1, ell): (usize, usize, usize),
    cfg: &OracleConfig,
) -> Vec<OracleHit> {
    let n = inst.n();
    let a = wp[v1];
    let left: Vec<f64> = (1..=(v1 - k)).map(|j| wp[v1 - j]).collect();
    let right: Vec<f64> = (1..=(ell - v1)).map(|j| wp[v1 + j]).collect();
    let phi = |alpha: f64, beta: f64| lc_misfit(a, exp_sums(beta, &left), exp_sums(alpha, &right));
    let axis = cfg.axis(cfg.grid_lo, cfg.grid_hi);

    let starts: Vec<(f64, f64)> = match (left.is_empty(), right.is_empty()) {
        (true, true) => vec![(0.0, 0.0)],
        (false, false) => {
            let rs: Vec<[f64; 3]> = axis.iter().map(|&t| exp_sums(t, &right)).collect();
            let ls: Vec<[f64; 3]> = axis.iter().map(|&t| exp_sums(t, &left)).collect();
            let m = axis.len();
            let mut values = vec![0.0; m * m];
            for (i, r) in rs.iter().enumerate() {
                for (j, l) in ls.iter().enumerate() {
                    values[i * m + j] = lc_misfit(a, *l, *r);
                }
            }
            local_minima(&values, m, m, cfg.minima_kept)
                .into_iter()
                .map(|(i, j)| compass(phi, (axis[i], axis[j]), cfg.step, cfg.refine_evals, 2))
                .collect()
        }
        (left_empty, _) => {
            // one piece: the free parameter is alpha when the left piece is empty
            let line = |t: f64| if left_empty { phi(t, 0.0) } else { phi(0.0, t) };
            let values: Vec<f64> = axis.iter().map(|&t| line(t)).collect();
            local_minima(&values, 1, axis.len(), cfg.minima_kept)
                .into_iter()
                .map(|(_, j)| {
                    let (t, _) = compass(
                        |x, _| line(x),
                        (axis[j], 0.0),
                        cfg.step,
                        cfg.refine_evals,
                        1,
                    );
                    if left_empty {
                        (t, 0.0)
                    } else {
                        (0.0, t)
                    }
                })
                .collect()
        }
    };

    starts
        .into_iter()
        .filter_map(|(alpha, beta)| {
            if !left.is_empty() && !right.is_empty() && alpha + beta > 1e-12 {
                return None;
            }
            let x = Distribution::from_raw(lc_mass(n, k, v1, ell, alpha, beta));
            let report = feasibility_report(inst, &x, cfg.shape_tol);
            if report.max_moment_residual > cfg.feas_tol || !is_log_concave(&x, cfg.shape_tol).holds
            {
                return None;
            }
            Some(OracleHit {
                objective: evaluate_objective(&inst.objective, &inst.space, &x),
                distribution: x,
                structure: (k + 1, v1 + 1, ell + 1),
                residual: report.max_moment_residual,
            })
        })
        .collect()
}

/// Exhaustive LC search over every support triple and a dense `(alpha, beta)`
/// grid. `None` when nothing verifies.
pub fn grid_search_lc(inst: &Instance, cfg: &OracleConfig) -> Result<Option<OracleHit>> {
    cfg.validate()?;
    inst.require_two_moments()?;
    let std = standardize(&inst.space, &inst.moments)?;
    let n = inst.n();
    let mut triples = Vec::new();
    for k in 0..n {
        for v1 in k..n {
            for ell in v1..n {
                triples.push((k, v1, ell));
            }
        }
    }
    let hits: Vec<OracleHit> = run_with_threads(cfg.threads, || {
        triples
            .par_iter()
            .flat_map_iter(|&t| lc_triple(inst, &std.values, t, cfg))
            .collect()
    })?;
    Ok(best_hit(inst.direction, hits))
}

/// Tail moments `sum_j d_j^i y_j` split into plateau, first-piece and
/// second-piece contributions so each grid point costs O(1).
struct TailParts {
    plateau: [f64; 3],
    first: Vec<[f64; 3]>,
    second: Vec<[f64; 3]>,
}

fn ifr_triple(
    inst: &Instance,
    (j1, v1, j2): (usize, usize, usize),
    cfg: &OracleConfig,
) -> Vec<OracleHit> {
    let n = inst.n();
    let w = inst.space.values();
    let d = |j: usize, i: i32| {
        let prev = if j == 1 { 0.0 } else { w[j - 2].powi(i) };
        w[j - 1].powi(i) - prev
    };
    let q = [
        inst.moments.get(0),
        inst.moments.get(1),
        inst.moments.get(2),
    ];
    let scale = [1.0, 1.0 + q[1].abs(), 1.0 + q[2].abs()];
    let first_len = v1 - j1;
    let second_len = j2 - 1 - v1;
    // log-ratios live in [grid_lo, 0]
    let axis = cfg.axis(cfg.grid_lo.min(-cfg.step), 0.0);
    let piece = |s: f64, from: usize, len: usize| {
        let mut out = [0.0; 3];
        for t in 1..=len {
            let e = (s * t as f64).exp();
            for (i, o) in out.iter_mut().enumerate() {
                *o += d(from + t, i as i32) * e;
            }
        }
        out
    };
    let mut plateau = [0.0; 3];
    for j in 1..=j1 {
        for (i, p) in plateau.iter_mut().enumerate() {
            *p += d(j, i as i32);
        }
    }
    let parts = TailParts {
        plateau,
        first: axis.iter().map(|&s| piece(s, j1, first_len)).collect(),
        second: axis.iter().map(|&s| piece(s, v1, second_len)).collect(),
    };
    let misfit = |p: &[f64; 3], f: &[f64; 3], s1: f64, sec: &[f64; 3]| {
        let carry = (s1 * first_len as f64).exp();
        let mut total = 0.0;
        for i in 1..3 {
            let r = (p[i] + f[i] + carry * sec[i] - q[i]) / scale[i];
            total += r * r;
        }
        total
    };
    let phi = |s1: f64, s2: f64| {
        misfit(
            &parts.plateau,
            &piece(s1, j1, first_len),
            s1,
            &piece(s2, v1, second_len),
        )
    };

    let starts: Vec<(f64, f64)> = match (first_len > 0, second_len > 0) {
        (false, false) => vec![(0.0, 0.0)],
        (true, true) => {
            let m = axis.len();
            let mut values = vec![0.0; m * m];
            for i in 0..m {
                for j in 0..m {
                    values[i * m + j] = if axis[j] > axis[i] {
                        f64::INFINITY
                    } else {
                        misfit(&parts.plateau, &parts.first[i], axis[i], &parts.second[j])
                    };
                }
            }
            local_minima(&values, m, m, cfg.minima_kept)
                .into_iter()
                .map(|(i, j)| {
                    let bounded = |a: f64, b: f64| {
                        if a > 0.0 || b > a {
                            f64::INFINITY
                        } else {
                            phi(a, b)
                        }
                    };
                    compass(bounded, (axis[i], axis[j]), cfg.step, cfg.refine_evals, 2)
                })
                .collect()
        }
        (first, _) => {
            let line = |s: f64| {
                if s > 0.0 {
                    f64::INFINITY
                } else if first {
                    phi(s, 0.0)
                } else {
                    phi(0.0, s)
                }
            };
            let values: Vec<f64> = axis.iter().map(|&s| line(s)).collect();
            local_minima(&values, 1, axis.len(), cfg.minima_kept)
                .into_iter()
                .map(|(_, j)| {
                    let (s, _) = compass(
                        |x, _| line(x),
                        (axis[j], 0.0),
                        cfg.step,
                        cfg.refine_evals,
                        1,
                    );
                    if first {
                        (s, 0.0)
                    } else {
                        (0.0, s)
                    }
                })
                .collect()
        }
    };

    starts
        .into_iter()
        .filter_map(|(s1, s2)| {
            let tails: Vec<f64> = (1..=n)
                .map(|j| {
                    if j <= j1 {
                        1.0
                    } else if j <= v1 {
                        (s1 * (j - j1) as f64).exp()
                    } else if j < j2 {
                        (s1 * first_len as f64 + s2 * (j - v1) as f64).exp()
                    } else {
                        0.0
                    }
                })
                .collect();
            let x = inverse_tail_transform(&TailSequence::from_raw(tails)).ok()?;
            let report = feasibility_report(inst, &x, cfg.shape_tol);
            if report.max_moment_residual > cfg.feas_tol || !is_ifr(&x, cfg.shape_tol).holds {
                return None;
            }
            Some(OracleHit {
                objective: evaluate_objective(&inst.objective, &inst.space, &x),
                distribution: x,
                structure: (j1, v1, j2),
                residual: report.max_moment_residual,
            })
        })
        .collect()
}

/// Exhaustive IFR search over every tail structure and a dense grid of
/// log-ratios in `[grid_lo, 0]`.
pub fn grid_search_ifr(inst: &Instance, cfg: &OracleConfig) -> Result<Option<OracleHit>> {
    cfg.validate()?;
    inst.require_two_moments()?;
    let n = inst.n();
    let mut triples = Vec::new();
    for j1 in 1..=n {
        for v1 in j1..=n {
            for j2 in (v1 + 1)..=(n + 1) {
                triples.push((j1, v1, j2));
            }
        }
    }
    let hits: Vec<OracleHit> = run_with_threads(cfg.threads, || {
        triples
            .par_iter()
            .flat_map_iter(|&t| ifr_triple(inst, t, cfg))
            .collect()
    })?;
    Ok(best_hit(inst.direction, hits))
}

/// A randomly generated feasible distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Probe {
    pub trial: u64,
    pub distribution: Distribution,
    pub objective: f64,
}

/// Solve `E[phi_1] = t_1`, `E[phi_2] = t_2` for the tilt `theta` of a base
/// profile; `masses(theta)` returns the tilted weights and their moments.
fn newton_tilt<F>(moments: F, target: [f64; 2]) -> Option<[f64; 2]>
where
    F: Fn([f64; 2]) -> Option<([f64; 2], [[f64; 2]; 2])>,
{
    let mut theta = [0.0; 2];
    let (mut m, mut jac) = moments(theta)?;
    let resid = |m: [f64; 2]| [m[0] - target[0], m[1] - target[1]];
    let size = |r: [f64; 2]| r[0].abs().max(r[1].abs());
    let mut r = resid(m);
    for _ in 0..200 {
        if size(r) < 1e-13 {
            return Some(theta);
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if !det.is_finite() || det.abs() < 1e-300 {
            return None;
        }
        let step = [
            -(jac[1][1] * r[0] - jac[0][1] * r[1]) / det,
            -(-jac[1][0] * r[0] + jac[0][0] * r[1]) / det,
        ];
        let mut lambda = 1.0;
        let mut moved = false;
        for _ in 0..50 {
            let t = [theta[0] + lambda * step[0], theta[1] + lambda * step[1]];
            if let Some((mt, jt)) = moments(t) {
                let rt = resid(mt);
                if size(rt) < (1.0 - 1e-4 * lambda) * size(r) {
                    theta = t;
                    m = mt;
                    jac = jt;
                    r = rt;
                    moved = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let _ = m;
    (size(r) < 1e-11).then_some(theta)
}

/// `v_{j-1} v_{j+1} <= v_j^2` on the positive stretch, compared through log
/// ratios so that tiny entries cannot hide a violation.
fn relatively_log_concave(v: &[f64]) -> bool {
    let last = v.iter().rposition(|&t| t > 0.0).unwrap_or(0);
    let first = v.iter().position(|&t| t > 0.0).unwrap_or(0);
    ((first + 1)..last).all(|j| {
        let curv = v[j - 1].ln() + v[j + 1].ln() - 2.0 * v[j].ln();
        curv.is_finite() && curv <= 1e-9
    })
}

/// Random concave log-profile on `len` points starting at zero.
fn concave_profile(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let spread = rng.gen_range(-4.0f64..1.0).exp();
    let mut slopes: Vec<f64> = (1..len).map(|_| rng.gen_range(-spread..spread)).collect();
    slopes.sort_by(|a, b| b.total_cmp(a));
    let mut out = Vec::with_capacity(len);
    let mut acc = 0.0;
    out.push(acc);
    for s in slopes {
        acc += s;
        out.push(acc);
    }
    out
}

fn lc_probe(inst: &Instance, wp: &[f64], rng: &mut ChaCha8Rng) -> Option<Distribution> {
    let n = inst.n();
    // wide supports are drawn half the time since spread-out moments need them
    let (k, ell) = if rng.gen_bool(0.5) {
        (0, n - 1)
    } else {
        let k = rng.gen_range(0..n);
        (k, rng.gen_range(k..n))
    };
    let base = concave_profile(rng, ell - k + 1);
    let pts: Vec<f64> = wp[k..=ell].to_vec();
    let weights = |theta: [f64; 2]| -> Vec<f64> {
        let logs: Vec<f64> = base
            .iter()
            .zip(&pts)
            .map(|(b, &w)| b + theta[0] * w + theta[1] * w * w)
            .collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let u: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = u.iter().sum();
        u.iter().map(|v| v / total).collect()
    };
    let moments = |theta: [f64; 2]| {
        let p = weights(theta);
        if p.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let e = |f: &dyn Fn(f64) -> f64| p.iter().zip(&pts).map(|(pi, &w)| pi * f(w)).sum::<f64>();
        let m1 = e(&|w| w);
        let m2 = e(&|w| w * w);
        let m3 = e(&|w| w * w * w);
        let m4 = e(&|w| w * w * w * w);
        // covariance of (w, w^2) under the tilted weights
        let c11 = m2 - m1 * m1;
        let c12 = m3 - m1 * m2;
        let c22 = m4 - m2 * m2;
        Some(([m1, m2], [[c11, c12], [c12, c22]]))
    };
    let theta = newton_tilt(moments, [0.0, 1.0])?;
    let mut mass = vec![0.0; n];
    mass[k..=ell].copy_from_slice(&weights(theta));
    let x = Distribution::from_raw(mass);
    (relatively_log_concave(&x.mass) && is_log_concave(&x, 1e-12).holds).then_some(x)
}

fn ifr_probe(inst: &Instance, rng: &mut ChaCha8Rng) -> Option<Distribution> {
    let n = inst.n();
    let w = inst.space.values();
    // tails positive on 1..=last (one-based), zero afterwards
    let last = rng.gen_range(1..=n);
    let mut base = concave_profile(rng, last);
    // concave and starting at 0; keep it nonincreasing
    for b in base.iter_mut() {
        *b = b.min(0.0);
    }
    let t: Vec<f64> = (0..last).map(|j| w[j] - w[0]).collect();
    let d = |j: usize, i: i32| {
        let prev = if j == 0 { 0.0 } else { w[j - 1].powi(i) };
        w[j].powi(i) - prev
    };
    let tails = |theta: [f64; 2]| -> Vec<f64> {
        (0..last)
            .map(|j| (base[j] + theta[0] * t[j] + theta[1] * t[j] * t[j]).exp())
            .collect()
    };
    let moments = |theta: [f64; 2]| {
        let y = tails(theta);
        if y.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let mut m = [0.0; 2];
        let mut jac = [[0.0; 2]; 2];
        for j in 0..last {
            for i in 0..2 {
                let c = d(j, i as i32 + 1) * y[j];
                m[i] += c;
                jac[i][0] += c * t[j];
                jac[i][1] += c * t[j] * t[j];
            }
        }
        Some((m, jac))
    };
    let theta = newton_tilt(moments, [inst.moments.get(1), inst.moments.get(2)])?;
    let mut y = tails(theta);
    y.resize(n, 0.0);
    if !relatively_log_concave(&y) {
        return None;
    }
    let x = inverse_tail_transform(&TailSequence::from_raw(y)).ok()?;
    is_ifr(&x, 1e-12).holds.then_some(x)
}

/// `trials` random shaped distributions pushed onto the moment constraints;
/// the feasible ones are returned in trial order. Deterministic in `seed`.
pub fn random_feasible_probe(
    inst: &Instance,
    shape: Shape,
    trials: u64,
    seed: u64,
) -> Result<Vec<Probe>> {
    inst.require_two_moments()?;
    if shape == Shape::Unimodal {
        return Err(Error::Unsupported("probes cover lc and ifr shapes".into()));
    }
    let std = standardize(&inst.space, &inst.moments)?;
    let probes = (0..trials)
        .into_par_iter()
        .filter_map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial);
            let x = match shape {
                Shape::Lc => lc_probe(inst, &std.values, &mut rng),
                _ => ifr_probe(inst, &mut rng),
            }?;
            let report = feasibility_report(inst, &x, 1e-12);
            if report.max_moment_residual > 1e-9 || !report.verdicts.nonnegative {
                return None;
            }
            Some(Probe {
                trial,
                objective: evaluate_objective(&inst.objective, &inst.space, &x),
                distribution: x,
            })
        })
        .collect();
    Ok(probes)
}

/// Outcome of checking a solver result against the oracles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub shape: Shape,
    pub bound: f64,
    pub grid_bound: Option<f64>,
    pub grid_gap: Option<f64>,
    pub probes: usize,
    pub probes_kept: usize,
    /// Largest amount by which any probe beats the bound (negative if none).
    pub worst_probe_excess: f64,
    pub seed: u64,
    pub passed: bool,
}

/// Grid gap allowed between the solver and the grid oracle.
pub const GRID_AGREEMENT: f64 = 1e-3;
/// Margin by which a probe may appear to beat a bound.
pub const PROBE_MARGIN: f64 = 1e-6;

/// Compare a solver result with the grid oracle (lc, ifr) and random probes.
pub fn certify(
    inst: &Instance,
    result: &BoundResult,
    trials: u64,
    seed: u64,
    cfg: &OracleConfig,
) -> Result<Certificate> {
    let inst = inst.with_direction(result.direction);
    let grid = match result.shape {
        Shape::Lc => grid_search_lc(&inst, cfg)?,
        Shape::Ifr => grid_search_ifr(&inst, cfg)?,
        Shape::Unimodal => None,
    };
    let probe_shape = if result.shape == Shape::Ifr {
        Shape::Ifr
    } else {
        Shape::Lc
    };
    let probes = random_feasible_probe(&inst, probe_shape, trials, seed)?;
    let excess = |v: f64| match result.direction {
        crate::moment::Direction::Max => v - result.bound,
        crate::moment::Direction::Min => result.bound - v,
    };
    let worst = probes
        .iter()
        .map(|p| excess(p.objective))
        .fold(f64::NEG_INFINITY, f64::max);
    let grid_bound = grid.map(|g| g.objective);
    let grid_gap = grid_bound.map(|g| (g - result.bound).abs());
    let grid_ok = match result.shape {
        Shape::Unimodal => true,
        _ => grid_gap.is_some_and(|g| g <= GRID_AGREEMENT),
    };
    Ok(Certificate {
        shape: result.shape,
        bound: result.bound,
        grid_bound,
        grid_gap,
        probes: trials as usize,
        probes_kept: probes.len(),
        worst_probe_excess: worst,
        seed,
        passed: grid_ok && worst <= PROBE_MARGIN,
    })
}
