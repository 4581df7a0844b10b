//! Unimodal relaxation: one LP per candidate mode `K`, best value over `K`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lp::{simplex_solve, LpProblem, LpSolution};
use crate::moment::{Distribution, Instance};
use crate::result::{run_with_threads, select_best, BoundResult, CandidateInfo, Residuals, Shape};
use crate::shape::{feasibility_report, SHAPE_TOL};

/// Moment equalities plus `x_j <= x_{j+1}` for `j < K` and `x_j >= x_{j+1}`
/// for `j >= K` (one-based `K`).
pub fn build_unimodal_lp(inst: &Instance, mode: usize) -> Result<LpProblem> {
    let n = inst.n();
    if !(1..=n).contains(&mode) {
        return Err(Error::InvalidInput(format!("mode {mode} outside 1..={n}")));
    }
    let w = inst.space.values();
    let mut p = LpProblem::new(n, inst.objective.coefficients(&inst.space));
    for i in 0..=inst.moments.order() {
        p.add_eq(
            w.iter().map(|v| v.powi(i as i32)).collect(),
            inst.moments.get(i),
        );
    }
    for j in 0..n.saturating_sub(1) {
        let mut row = vec![0.0; n];
        if j + 1 < mode {
            row[j] = 1.0;
            row[j + 1] = -1.0;
        } else {
            row[j] = -1.0;
            row[j + 1] = 1.0;
        }
        p.add_le(row, 0.0);
    }
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct UnimodalConfig {
    pub threads: Option<usize>,
}

/// Best bound over all modes; ties go to the smallest mode.
pub fn solve_unimodal(inst: &Instance, cfg: &UnimodalConfig) -> Result<BoundResult> {
    if cfg.threads == Some(0) {
        return Err(Error::InvalidInput("threads must be positive".into()));
    }
    let n = inst.n();
    let per_mode: Vec<Result<Option<(usize, LpSolution)>>> = run_with_threads(cfg.threads, || {
        (1..=n)
            .into_par_iter()
            .map(|mode| {
                let p = build_unimodal_lp(inst, mode)?;
                match simplex_solve(&p, inst.direction) {
                    Ok(s) => Ok(Some((mode, s))),
                    Err(Error::Infeasible(_)) => Ok(None),
                    Err(e) => Err(e),
                }
            })
            .collect()
    })?;
    let mut solved = Vec::new();
    for r in per_mode {
        if let Some(s) = r? {
            solved.push(s);
        }
    }
    let found = solved.len();
    let (mode, best) = select_best(solved, inst.direction, |s| s.1.value, |a, b| a.0.cmp(&b.0))
        .ok_or_else(|| {
            Error::Infeasible("no unimodal distribution satisfies the moments".into())
        })?;
    let witness = Distribution::from_raw(best.x);
    let report = feasibility_report(inst, &witness, SHAPE_TOL);
    Ok(BoundResult {
        shape: Shape::Unimodal,
        direction: inst.direction,
        bound: best.value,
        witness,
        candidate: CandidateInfo::Unimodal { mode },
        residuals: Residuals::from_report(&report),
        triples_searched: n,
        candidates_found: found,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moment::Direction;
    use crate::shape::is_unimodal;

    fn row(n: usize, s1: f64, s2: f64, d: Direction) -> Instance {
        Instance::binomial_tail(n, s1, s2, d).unwrap()
    }

    #[test]
    fn constraint_layout() {
        let inst = row(5, 1.9, 1.3, Direction::Max);
        let p = build_unimodal_lp(&inst, 1).unwrap();
        assert_eq!(p.constraint_count(), 3 + 4);
        assert!(p.le_rows.iter().all(|r| r.iter().sum::<f64>() == 0.0));
        // mode 1: x_j >= x_{j+1} everywhere
        assert_eq!(p.le_rows[0][..2], [-1.0, 1.0]);
        let p = build_unimodal_lp(&inst, 5).unwrap();
        assert!(p
            .le_rows
            .iter()
            .enumerate()
            .all(|(j, r)| r[j] == 1.0 && r[j + 1] == -1.0));
        assert!(build_unimodal_lp(&inst, 0).is_err());
        assert!(build_unimodal_lp(&inst, 6).is_err());
    }

    #[test]
    fn first_table_row() {
        let lo = solve_unimodal(
            &row(5, 1.9, 1.3, Direction::Min),
            &UnimodalConfig::default(),
        )
        .unwrap();
        assert!((lo.bound - 0.875).abs() < 1e-9, "{}", lo.bound);
        assert!(is_unimodal(&lo.witness, 1e-12));
        assert!(lo.residuals.max_moment < 1e-9);
        let hi = solve_unimodal(
            &row(5, 1.9, 1.3, Direction::Max),
            &UnimodalConfig::default(),
        )
        .unwrap();
        assert!((hi.bound - 1.0).abs() < 1e-9);
    }
}
