//! Dense two-phase tableau simplex with Bland's anti-cycling rule.
//!
//! Problems here have a handful of equality rows and `n - 1` monotonicity
//! rows, so a dense tableau is plenty.

use crate::error::{Error, Result};
use crate::moment::Direction;

/// `optimize c.x` subject to `eq_rows x = eq_rhs`, `le_rows x <= le_rhs`, `x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub n_vars: usize,
    pub objective: Vec<f64>,
    pub eq_rows: Vec<Vec<f64>>,
    pub eq_rhs: Vec<f64>,
    pub le_rows: Vec<Vec<f64>>,
    pub le_rhs: Vec<f64>,
}

impl LpProblem {
    pub fn new(n_vars: usize, objective: Vec<f64>) -> Self {
        assert_eq!(objective.len(), n_vars);
        Self {
            n_vars,
            objective,
            eq_rows: Vec::new(),
            eq_rhs: Vec::new(),
            le_rows: Vec::new(),
            le_rhs: Vec::new(),
        }
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) {
        assert_eq!(row.len(), self.n_vars);
        self.eq_rows.push(row);
        self.eq_rhs.push(rhs);
    }

    pub fn add_le(&mut self, row: Vec<f64>, rhs: f64) {
        assert_eq!(row.len(), self.n_vars);
        self.le_rows.push(row);
        self.le_rhs.push(rhs);
    }

    pub fn constraint_count(&self) -> usize {
        self.eq_rows.len() + self.le_rows.len()
    }

    /// Largest violation of any constraint (including `x >= 0`) at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let dot = |row: &[f64]| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        let eq = self
            .eq_rows
            .iter()
            .zip(&self.eq_rhs)
            .map(|(r, b)| (dot(r) - b).abs());
        let le = self
            .le_rows
            .iter()
            .zip(&self.le_rhs)
            .map(|(r, b)| (dot(r) - b).max(0.0));
        let nn = x.iter().map(|v| (-v).max(0.0));
        eq.chain(le).chain(nn).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-12;
const FEAS_EPS: f64 = 1e-9;
const MAX_ITER: usize = 100_000;

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    cols: usize,
    iterations: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rhs[r] /= p;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r];
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let factor = self.rows[i][c];
            if factor != 0.0 {
                for (v, &pr) in self.rows[i].iter_mut().zip(&pivot_row) {
                    *v -= factor * pr;
                }
                self.rows[i][c] = 0.0;
                self.rhs[i] -= factor * pivot_rhs;
                if self.rhs[i] < 0.0 && self.rhs[i] > -FEAS_EPS {
                    self.rhs[i] = 0.0;
                }
            }
        }
        self.basis[r] = c;
        self.iterations += 1;
    }

    /// Minimize `cost . x` from the current basic feasible solution, never
    /// entering a column for which `allowed` is false.
    fn optimize(&mut self, cost: &[f64], allowed: &dyn Fn(usize) -> bool) -> Result<()> {
        loop {
            if self.iterations > MAX_ITER {
                return Err(Error::InvalidInput(
                    "simplex iteration limit reached".into(),
                ));
            }
            // Bland: lowest-index improving column
            let entering = (0..self.cols).filter(|&j| allowed(j)).find(|&j| {
                let reduced = cost[j]
                    - self
                        .basis
                        .iter()
                        .enumerate()
                        .map(|(i, &b)| cost[b] * self.rows[i][j])
                        .sum::<f64>();
                reduced < -COST_EPS
            });
            let Some(c) = entering else {
                return Ok(());
            };
            // ratio test, ties to the lowest basic index
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][c];
                if a > PIVOT_EPS {
                    let ratio = self.rhs[i] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-14
                                || ((ratio - lr).abs() <= 1e-14 && self.basis[i] < self.basis[li])
                            {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Err(Error::Unbounded);
            };
            self.pivot(r, c);
        }
    }

    fn value(&self, cost: &[f64]) -> f64 {
        self.basis
            .iter()
            .zip(&self.rhs)
            .map(|(&b, &v)| cost[b] * v)
            .sum()
    }
}

pub fn simplex_solve(p: &LpProblem, direction: Direction) -> Result<LpSolution> {
    let n = p.n_vars;
    let n_le = p.le_rows.len();
    let m = p.constraint_count();
    let n_struct = n + n_le;
    let cols = n_struct + m;

    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let all_rows = p
        .eq_rows
        .iter()
        .zip(&p.eq_rhs)
        .map(|(r, &b)| (r, b, None))
        .chain(
            p.le_rows
                .iter()
                .zip(&p.le_rhs)
                .enumerate()
                .map(|(s, (r, &b))| (r, b, Some(s))),
        );
    for (i, (row, b, slack)) in all_rows.enumerate() {
        let mut t = vec![0.0; cols];
        t[..n].copy_from_slice(row);
        if let Some(s) = slack {
            t[n + s] = 1.0;
        }
        let sign = if b < 0.0 { -1.0 } else { 1.0 };
        for v in t[..n_struct].iter_mut() {
            *v *= sign;
        }
        t[n_struct + i] = 1.0;
        rows.push(t);
        rhs.push(b * sign);
    }
    let mut tab = Tableau {
        rows,
        rhs,
        basis: (n_struct..cols).collect(),
        cols,
        iterations: 0,
    };

    // phase one: drive the artificials to zero
    let mut phase1 = vec![0.0; cols];
    for c in phase1[n_struct..].iter_mut() {
        *c = 1.0;
    }
    tab.optimize(&phase1, &|_| true)?;
    let scale = 1.0 + tab.rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if tab.value(&phase1) > FEAS_EPS * scale {
        return Err(Error::Infeasible(
            "linear program has no feasible point".into(),
        ));
    }

    // pivot remaining (zero-level) artificials out, dropping redundant rows
    let mut r = 0;
    while r < tab.rows.len() {
        if tab.basis[r] >= n_struct {
            if let Some(c) = (0..n_struct).find(|&j| tab.rows[r][j].abs() > PIVOT_EPS) {
                tab.pivot(r, c);
                r += 1;
            } else {
                tab.rows.remove(r);
                tab.rhs.remove(r);
                tab.basis.remove(r);
            }
        } else {
            r += 1;
        }
    }

    let sign = match direction {
        Direction::Min => 1.0,
        Direction::Max => -1.0,
    };
    let mut cost = vec![0.0; cols];
    for (c, &o) in cost.iter_mut().zip(&p.objective) {
        *c = sign * o;
    }
    tab.optimize(&cost, &|j| j < n_struct)?;

    let mut x = vec![0.0; n];
    for (&b, &v) in tab.basis.iter().zip(&tab.rhs) {
        if b < n {
            x[b] = v.max(0.0);
        }
    }
    let value = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution {
        x,
        value,
        iterations: tab.iterations,
    })
}
