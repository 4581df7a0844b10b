//! Sharp bounds for discrete moment problems under log-concave and
//! increasing-failure-rate shape constraints.
//!
//! The solvers search the piecewise geometric families that contain an
//! optimal extreme point: two geometric pieces of probability mass for
//! log-concave distributions, a plateau followed by two geometric pieces of
//! tail mass for IFR distributions. A unimodal LP relaxation and a brute-force
//! grid oracle are provided for comparison and certification.

// `!(a < b)` is used on purpose so that NaN inputs are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod ifr;
pub mod lc;
pub mod lp;
pub mod moment;
pub mod numeric;
pub mod oracle;
pub mod result;
pub mod shape;
pub mod unimodal;

pub use error::{Error, Result};
pub use moment::{
    binomial_to_power, evaluate_moments, evaluate_objective, inverse_tail_transform, standardize,
    tail_transform, BinomialMomentVector, Direction, Distribution, Instance, MomentVector,
    ObjectiveSpec, SampleSpace, StandardizedSpace, TailSequence,
};
pub use result::{BoundResult, CandidateInfo, Shape};
