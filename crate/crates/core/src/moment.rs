//! Problem data: sample spaces, moment vectors, objectives, distributions and
//! tail sequences, plus the transforms every solver shares.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, CompensatedSum};

/// Absolute tolerance used when validating probability vectors.
pub const MASS_TOL: f64 = 1e-8;

/// Ordered support points `w_1 < ... < w_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSpace {
    values: Vec<f64>,
}

impl SampleSpace {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("sample space is empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "sample space has non-finite values".into(),
            ));
        }
        if let Some(i) = values.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(format!(
                "sample space is not strictly increasing at position {}",
                i + 1
            )));
        }
        Ok(Self { values })
    }

    /// `w_j = j - 1` for `j = 1..=n`.
    pub fn natural(n: usize) -> Self {
        assert!(n >= 1, "sample space needs at least one point");
        Self {
            values: (0..n).map(|j| j as f64).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Power moments `(q_0, ..., q_m)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentVector {
    values: Vec<f64>,
}

impl MomentVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("moment vector is empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "moment vector has non-finite entries".into(),
            ));
        }
        if (values[0] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "zeroth moment must be 1, got {}",
                values[0]
            )));
        }
        Ok(Self { values })
    }

    /// Mean and second moment, the common case.
    pub fn two(q1: f64, q2: f64) -> Result<Self> {
        Self::new(vec![1.0, q1, q2])
    }

    /// Moment vector without the `q_0 = 1` check; used for evaluated moments
    /// of arbitrary vectors.
    pub(crate) fn unchecked(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn order(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn mean(&self) -> f64 {
        self.values.get(1).copied().unwrap_or(0.0)
    }

    /// `q_2 - q_1^2`, or `None` for `m < 2`.
    pub fn variance(&self) -> Option<f64> {
        (self.order() >= 2).then(|| self.values[2] - self.values[1] * self.values[1])
    }
}

/// Binomial moments `S_i = E[binom(X, i)]` for `i = 0, 1, 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialMomentVector {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
}

impl BinomialMomentVector {
    pub fn new(s0: f64, s1: f64, s2: f64) -> Result<Self> {
        if (s0 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("S_0 must be 1, got {s0}")));
        }
        if !(s1 >= 0.0 && s2 >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "binomial moments must be nonnegative, got S_1 = {s1}, S_2 = {s2}"
            )));
        }
        Ok(Self { s0, s1, s2 })
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        match values {
            [s0, s1, s2] => Self::new(*s0, *s1, *s2),
            _ => Err(Error::InvalidInput(format!(
                "expected 3 binomial moments, got {}",
                values.len()
            ))),
        }
    }
}

/// `E[X^2] = 2 E[X(X-1)/2] + E[X]`.
pub fn binomial_to_power(b: &BinomialMomentVector) -> MomentVector {
    MomentVector::unchecked(vec![b.s0, b.s1, 2.0 * b.s2 + b.s1])
}

/// Linear objective `sum f_j x_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectiveSpec {
    Linear {
        coeffs: Vec<f64>,
    },
    /// `f_j = 1` when `w_j >= threshold`.
    TailGeq {
        threshold: f64,
    },
}

impl ObjectiveSpec {
    pub fn coefficients(&self, space: &SampleSpace) -> Vec<f64> {
        match self {
            ObjectiveSpec::Linear { coeffs } => coeffs.clone(),
            ObjectiveSpec::TailGeq { threshold } => space
                .values()
                .iter()
                .map(|&w| if w >= *threshold { 1.0 } else { 0.0 })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Max,
    Min,
}

impl Direction {
    /// True when `a` is strictly better than `b` in this direction.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Direction::Max => a > b,
            Direction::Min => a < b,
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(Direction::Max),
            "min" => Ok(Direction::Min),
            other => Err(Error::InvalidInput(format!("unknown direction {other:?}"))),
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Direction::Max => "max",
            Direction::Min => "min",
        })
    }
}

/// A full discrete moment problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub space: SampleSpace,
    pub moments: MomentVector,
    pub objective: ObjectiveSpec,
    pub direction: Direction,
}

impl Instance {
    pub fn new(
        space: SampleSpace,
        moments: MomentVector,
        objective: ObjectiveSpec,
        direction: Direction,
    ) -> Result<Self> {
        if let ObjectiveSpec::Linear { coeffs } = &objective {
            if coeffs.len() != space.len() {
                return Err(Error::InvalidInput(format!(
                    "objective has {} coefficients for {} support points",
                    coeffs.len(),
                    space.len()
                )));
            }
        }
        Ok(Self {
            space,
            moments,
            objective,
            direction,
        })
    }

    /// Instance on `0..n-1` from binomial moments with the tail objective
    /// `P(X >= 1)`.
    pub fn binomial_tail(n: usize, s1: f64, s2: f64, direction: Direction) -> Result<Self> {
        let b = BinomialMomentVector::new(1.0, s1, s2)?;
        Self::new(
            SampleSpace::natural(n),
            binomial_to_power(&b),
            ObjectiveSpec::TailGeq { threshold: 1.0 },
            direction,
        )
    }

    pub fn n(&self) -> usize {
        self.space.len()
    }

    pub fn with_direction(&self, direction: Direction) -> Self {
        Self {
            direction,
            ..self.clone()
        }
    }

    /// Solver paths need exactly two moments with positive variance.
    pub fn require_two_moments(&self) -> Result<(f64, f64)> {
        if self.moments.order() != 2 {
            return Err(Error::Unsupported(format!(
                "solvers handle m = 2 moments, instance has m = {}",
                self.moments.order()
            )));
        }
        let var = self.moments.variance().unwrap_or(0.0);
        if !(var > 0.0) {
            return Err(Error::DegenerateVariance { variance: var });
        }
        Ok((self.moments.get(1), self.moments.get(2)))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        file.into_instance()
    }

    pub fn to_json(&self) -> Result<String> {
        let file = InstanceFile {
            n: self.n(),
            values: Some(self.space.values().to_vec()),
            moments: MomentsFile {
                kind: MomentKind::Power,
                values: self.moments.values().to_vec(),
            },
            objective: self.objective.clone(),
            direction: Some(self.direction),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentKind {
    Power,
    Binomial,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsFile {
    pub kind: MomentKind,
    pub values: Vec<f64>,
}

/// On-disk instance layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    pub moments: MomentsFile,
    pub objective: ObjectiveSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<Instance> {
        if self.n == 0 {
            return Err(Error::InvalidInput("n must be positive".into()));
        }
        let space = match self.values {
            Some(v) => {
                if v.len() != self.n {
                    return Err(Error::InvalidInput(format!(
                        "n = {} but {} values given",
                        self.n,
                        v.len()
                    )));
                }
                SampleSpace::new(v)?
            }
            None => SampleSpace::natural(self.n),
        };
        let moments = match self.moments.kind {
            MomentKind::Power => MomentVector::new(self.moments.values)?,
            MomentKind::Binomial => {
                let b = BinomialMomentVector::from_slice(&self.moments.values)?;
                binomial_to_power(&b)
            }
        };
        Instance::new(
            space,
            moments,
            self.objective,
            self.direction.unwrap_or(Direction::Max),
        )
    }
}

/// Probability mass vector over a sample space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub mass: Vec<f64>,
}

impl Distribution {
    /// Validated: nonnegative (to `MASS_TOL`) and summing to one.
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        if mass.is_empty() {
            return Err(Error::InvalidInput("distribution is empty".into()));
        }
        if mass.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "distribution has non-finite mass".into(),
            ));
        }
        if let Some(j) = mass.iter().position(|&v| v < -MASS_TOL) {
            return Err(Error::InvalidInput(format!(
                "negative mass at index {}",
                j + 1
            )));
        }
        let total = compensated_sum(mass.iter().copied());
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidInput(format!("mass sums to {total}, not 1")));
        }
        Ok(Self { mass })
    }

    /// No validation; feasibility checks report on whatever is given.
    pub fn from_raw(mass: Vec<f64>) -> Self {
        Self { mass }
    }

    pub fn point_mass(n: usize, index: usize) -> Self {
        let mut mass = vec![0.0; n];
        mass[index] = 1.0;
        Self { mass }
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    /// Indices of the first and last positive entries.
    pub fn support_bounds(&self) -> Option<(usize, usize)> {
        let first = self.mass.iter().position(|&v| v > 0.0)?;
        let last = self.mass.iter().rposition(|&v| v > 0.0)?;
        Some((first, last))
    }
}

/// Tail probabilities `y_j = sum_{k >= j} x_k`, with `y_{n+1} = 0` implied.
#[derive(Debug, Clone, PartialEq)]
pub struct TailSequence {
    pub tails: Vec<f64>,
}

impl TailSequence {
    pub fn new(tails: Vec<f64>) -> Result<Self> {
        if tails.is_empty() {
            return Err(Error::InvalidInput("tail sequence is empty".into()));
        }
        if (tails[0] - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidInput(format!(
                "first tail must be 1, got {}",
                tails[0]
            )));
        }
        Ok(Self { tails })
    }

    pub fn from_raw(tails: Vec<f64>) -> Self {
        Self { tails }
    }

    pub fn len(&self) -> usize {
        self.tails.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tails.is_empty()
    }

    /// `y_j` with `j` zero-based; returns 0 past the end.
    pub fn get(&self, j: usize) -> f64 {
        self.tails.get(j).copied().unwrap_or(0.0)
    }
}

pub fn tail_transform(x: &Distribution) -> TailSequence {
    let mut tails = vec![0.0; x.len()];
    let mut acc = CompensatedSum::new();
    for (j, &v) in x.mass.iter().enumerate().rev() {
        acc.add(v);
        tails[j] = acc.value();
    }
    TailSequence { tails }
}

/// Monotonicity slack allowed before `NotMonotone` is raised.
pub const MONOTONE_TOL: f64 = 1e-12;

pub fn inverse_tail_transform(y: &TailSequence) -> Result<Distribution> {
    let n = y.len();
    let mut mass = Vec::with_capacity(n);
    for j in 0..n {
        let next = y.get(j + 1);
        let d = y.tails[j] - next;
        if d < -MONOTONE_TOL {
            return Err(Error::NotMonotone {
                index: j + 1,
                prev: y.tails[j],
                next,
            });
        }
        mass.push(d);
    }
    Ok(Distribution { mass })
}

/// Power moments `(sum x, sum w x, ..., sum w^m x)`.
pub fn evaluate_moments(space: &SampleSpace, x: &Distribution, order: usize) -> MomentVector {
    assert_eq!(space.len(), x.len(), "distribution length mismatch");
    let values = (0..=order)
        .map(|i| {
            compensated_sum(
                space
                    .values()
                    .iter()
                    .zip(&x.mass)
                    .map(|(&w, &m)| w.powi(i as i32) * m),
            )
        })
        .collect();
    MomentVector::unchecked(values)
}

pub fn evaluate_objective(obj: &ObjectiveSpec, space: &SampleSpace, x: &Distribution) -> f64 {
    assert_eq!(space.len(), x.len(), "distribution length mismatch");
    match obj {
        ObjectiveSpec::Linear { coeffs } => {
            compensated_sum(coeffs.iter().zip(&x.mass).map(|(f, m)| f * m))
        }
        ObjectiveSpec::TailGeq { threshold } => compensated_sum(
            space
                .values()
                .iter()
                .zip(&x.mass)
                .filter(|(&w, _)| w >= *threshold)
                .map(|(_, &m)| m),
        ),
    }
}

/// Sample space shifted to mean zero and scaled to unit variance.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedSpace {
    pub epsilon: f64,
    pub mean: f64,
    pub values: Vec<f64>,
}

impl StandardizedSpace {
    /// Standardized value at a zero-based index (the breakpoint value `a`
    /// when the index is the breakpoint).
    pub fn at(&self, index: usize) -> f64 {
        self.values[index]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Map a standardized value back to the original scale.
    pub fn destandardize(&self, value: f64) -> f64 {
        value / self.epsilon + self.mean
    }
}

pub fn standardize(space: &SampleSpace, q: &MomentVector) -> Result<StandardizedSpace> {
    let var = q.variance().unwrap_or(0.0);
    if !(var > 0.0) {
        return Err(Error::DegenerateVariance { variance: var });
    }
    let epsilon = 1.0 / var.sqrt();
    let mean = q.mean();
    let values = space
        .values()
        .iter()
        .map(|&w| w * epsilon - mean * epsilon)
        .collect();
    Ok(StandardizedSpace {
        epsilon,
        mean,
        values,
    })
}
