use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moment::{Direction, Distribution};
use crate::shape::FeasibilityReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Lc,
    Ifr,
    Unimodal,
}

impl std::str::FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lc" => Ok(Shape::Lc),
            "ifr" => Ok(Shape::Ifr),
            "unimodal" => Ok(Shape::Unimodal),
            other => Err(Error::InvalidInput(format!("unknown shape {other:?}"))),
        }
    }
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Shape::Lc => "lc",
            Shape::Ifr => "ifr",
            Shape::Unimodal => "unimodal",
        })
    }
}

/// Parameters of the optimal extreme point, one layout per solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CandidateInfo {
    Lc {
        k: usize,
        v1: usize,
        ell: usize,
        alpha: Option<f64>,
        beta: Option<f64>,
        rho: f64,
    },
    Ifr {
        j1: usize,
        v1: usize,
        j2: usize,
        r1: Option<f64>,
        r2: Option<f64>,
    },
    Unimodal {
        mode: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub moments: Vec<f64>,
    pub max_moment: f64,
    pub lc_violation: f64,
    pub ifr_violation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
}

impl Residuals {
    pub fn from_report(report: &FeasibilityReport) -> Self {
        Self {
            moments: report.moment_residuals.clone(),
            max_moment: report.max_moment_residual,
            lc_violation: report.lc_violation,
            ifr_violation: report.ifr_violation,
            f: None,
            g: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub shape: Shape,
    pub direction: Direction,
    pub bound: f64,
    pub witness: Distribution,
    pub candidate: CandidateInfo,
    pub residuals: Residuals,
    pub triples_searched: usize,
    pub candidates_found: usize,
}

impl BoundResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Objectives closer than this are treated as ties.
pub const TIE_TOL: f64 = 1e-12;

/// Best item under `direction`, ties resolved by `tie` (smaller wins).
pub fn select_best<T, F, C>(items: Vec<T>, direction: Direction, objective: F, tie: C) -> Option<T>
where
    F: Fn(&T) -> f64,
    C: Fn(&T, &T) -> Ordering,
{
    let mut best: Option<T> = None;
    for item in items {
        best = Some(match best {
            None => item,
            Some(current) => {
                let (a, b) = (objective(&item), objective(&current));
                if (a - b).abs() <= TIE_TOL * a.abs().max(b.abs()).max(1.0) {
                    if tie(&item, &current) == Ordering::Less {
                        item
                    } else {
                        current
                    }
                } else if direction.better(a, b) {
                    item
                } else {
                    current
                }
            }
        });
    }
    best
}

/// Run `f` on a dedicated pool when a thread count is given.
pub(crate) fn run_with_threads<R, F>(threads: Option<usize>, f: F) -> Result<R>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    match threads {
        None => Ok(f()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
