//! Randomized equivalence and identity checks on the moment and shape
//! primitives.

mod common;

use common::*;
use momentbound::moment::{binomial_to_power, BinomialMomentVector, MomentVector};
use momentbound::shape::{is_ifr, is_ifr_via_tails, is_lc_prime_feasible, is_log_concave};
use momentbound::{
    evaluate_moments, inverse_tail_transform, standardize, tail_transform, Distribution,
    SampleSpace,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn log_concave_matches_power_form(m in shaped_mass()) {
        let x = Distribution::from_raw(m);
        prop_assert_eq!(is_log_concave(&x, 0.0).holds, is_lc_prime_feasible(&x, 0.0));
    }

    #[test]
    fn ifr_matches_tail_form(m in shaped_mass()) {
        prop_assume!(m.iter().any(|&v| v > 0.0));
        let x = Distribution::from_raw(m);
        prop_assert_eq!(is_ifr(&x, 0.0).holds, is_ifr_via_tails(&x, 0.0));
    }

    #[test]
    fn log_concave_implies_ifr(m in shaped_mass()) {
        prop_assume!(m.iter().any(|&v| v > 0.0));
        let x = Distribution::from_raw(m);
        if is_log_concave(&x, 0.0).holds {
            prop_assert!(is_ifr(&x, 0.0).holds);
        }
    }

    #[test]
    fn tail_round_trip(x in probability_vector(1, 40)) {
        let back = inverse_tail_transform(&tail_transform(&x)).unwrap();
        for (a, b) in back.mass.iter().zip(&x.mass) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn binomial_moments_convert_to_power_moments(x in probability_vector(2, 30)) {
        let n = x.len();
        let space = SampleSpace::natural(n);
        let s1: f64 = x.mass.iter().enumerate().map(|(j, p)| j as f64 * p).sum();
        let s2: f64 = x
            .mass
            .iter()
            .enumerate()
            .map(|(j, p)| (j * j.saturating_sub(1)) as f64 / 2.0 * p)
            .sum();
        let q = binomial_to_power(&BinomialMomentVector::new(1.0, s1, s2).unwrap());
        let direct = evaluate_moments(&space, &x, 2);
        for i in 1..=2 {
            let scale = 1.0 + direct.get(i).abs();
            prop_assert!((q.get(i) - direct.get(i)).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn standardized_moments_are_zero_and_one(x in probability_vector(2, 30)) {
        let space = SampleSpace::natural(x.len());
        let q = evaluate_moments(&space, &x, 2);
        let q = MomentVector::two(q.get(1), q.get(2)).unwrap();
        prop_assume!(q.variance().unwrap() > 1e-6);
        let s = standardize(&space, &q).unwrap();
        let mean: f64 = s.values.iter().zip(&x.mass).map(|(w, p)| w * p).sum();
        let second: f64 = s.values.iter().zip(&x.mass).map(|(w, p)| w * w * p).sum();
        prop_assert!(mean.abs() < 1e-9);
        prop_assert!((second - 1.0).abs() < 1e-9);
        for (w, &v) in s.values.iter().zip(space.values()) {
            prop_assert!((s.destandardize(*w) - v).abs() < 1e-9);
        }
    }
}
