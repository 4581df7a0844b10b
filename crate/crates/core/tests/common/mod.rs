//! Shared fixtures and generators for the integration tests.
#![allow(dead_code)]

use momentbound::{Direction, Distribution, Instance};
use proptest::prelude::*;

/// `(n, S1, S2)` rows of the benchmark table, objective `P(X >= 1)`.
pub const TABLE1: [(usize, f64, f64); 6] = [
    (5, 1.9, 1.3),
    (5, 2.1, 1.3),
    (5, 1.9, 1.7),
    (11, 5.2, 13.1),
    (11, 4.6, 13.1),
    (11, 5.2, 15.1),
];

pub fn table_instance(row: usize, direction: Direction) -> Instance {
    let (n, s1, s2) = TABLE1[row];
    Instance::binomial_tail(n, s1, s2, direction).unwrap()
}

pub fn data_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join(name)
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn pad(core: Vec<f64>, left: usize, right: usize) -> Vec<f64> {
    let mut v = vec![0.0; left];
    v.extend(core);
    v.extend(std::iter::repeat_n(0.0, right));
    v
}

/// Small-integer vectors (so the shape checks run in exact arithmetic)
/// mixing arbitrary, log-concave, geometric and perturbed shapes.
pub fn shaped_mass() -> impl Strategy<Value = Vec<f64>> {
    let arbitrary =
        prop::collection::vec(0u32..=5, 3..=7).prop_map(|v| v.into_iter().map(f64::from).collect());
    let convolution = (
        prop::collection::vec((1u32..=3, 1u32..=3), 1..=5),
        0usize..=1,
        0usize..=1,
    )
        .prop_map(|(factors, l, r)| {
            let core = factors.iter().fold(vec![1.0], |acc, &(a, b)| {
                convolve(&acc, &[f64::from(a), f64::from(b)])
            });
            pad(core, l, r)
        });
    let geometric =
        (1u32..=3, 0u32..=3, 0u32..=3, 0usize..=1, 0usize..=1).prop_map(|(c, up, down, l, r)| {
            let c = f64::from(c);
            let mut core: Vec<f64> = (0..=up).map(|j| c * 2f64.powi(j as i32)).collect();
            let peak = *core.last().unwrap();
            core.extend((1..=down).map(|j| peak / 2f64.powi(j as i32)));
            pad(core, l, r)
        });
    let perturbed = (
        prop::collection::vec((1u32..=3, 1u32..=3), 2..=5),
        any::<prop::sample::Index>(),
        2u32..=4,
    )
        .prop_map(|(factors, at, mul)| {
            let mut core = factors.iter().fold(vec![1.0], |acc, &(a, b)| {
                convolve(&acc, &[f64::from(a), f64::from(b)])
            });
            let i = at.index(core.len());
            core[i] *= f64::from(mul);
            core
        });
    prop_oneof![arbitrary, convolution, geometric, perturbed]
}

/// Normalized nonnegative vectors with a sprinkling of exact zeros.
pub fn probability_vector(min_len: usize, max_len: usize) -> impl Strategy<Value = Distribution> {
    prop::collection::vec(
        prop_oneof![3 => 0.0f64..1.0, 1 => Just(0.0)],
        min_len..=max_len,
    )
    .prop_filter("needs positive mass", |v| v.iter().any(|&x| x > 0.0))
    .prop_map(|v| {
        let total: f64 = v.iter().sum();
        Distribution::from_raw(v.into_iter().map(|x| x / total).collect())
    })
}
