//! Independent routes to the majorization verdict, checked against the
//! cumulative-sum implementation.

use majorize::convex::{lambda, lookup, Battery};
use majorize::majorization::{
    compare_continuous, compare_discrete, hinge_integral, hinge_thresholds, hinge_witness, majorization_failure,
    Relation, DEFAULT_TOL,
};
use majorize::{Density, Grid};
use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use proptest::prelude::*;

fn density(values: Vec<f64>) -> Density {
    Density::new(Grid::new(values.len()).unwrap(), values).unwrap()
}

/// Largest sum of `k` cells, found by enumerating subsets.
fn brute_top_k(values: &[f64], k: usize) -> f64 {
    let n = values.len();
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).map(|i| values[i]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `f ≺ g` through subset sums: same mass and every k-subset maximum of `f`
/// below that of `g`.
fn subset_oracle(f: &[f64], g: &[f64], tol: f64) -> bool {
    let n = f.len();
    let mass = |v: &[f64]| v.iter().sum::<f64>();
    if (mass(f) - mass(g)).abs() > tol {
        return false;
    }
    (1..n).all(|k| brute_top_k(f, k) <= brute_top_k(g, k) + tol)
}

/// `∫(p − a)₊` evaluated directly on cell values.
fn hinge(values: &[f64], a: f64) -> f64 {
    values.iter().map(|v| (v - a).max(0.0)).sum::<f64>() / values.len() as f64
}

/// For step densities `a ↦ ∫(p − a)₊` is piecewise linear with kinks at the
/// cell values, so checking every cell value of either density is exact.
fn breakpoint_oracle(f: &[f64], g: &[f64], tol: f64) -> bool {
    let mass = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    if (mass(f) - mass(g)).abs() > tol {
        return false;
    }
    f.iter().chain(g).all(|&a| hinge(f, a) <= hinge(g, a) + tol)
}

fn small_step_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..9).prop_flat_map(|n| {
        let v = || prop::collection::vec((0u8..6).prop_map(f64::from), n);
        (v(), v())
    })
}

proptest! {
    #[test]
    fn cumulative_matches_subset_oracle((f, g) in small_step_pair()) {
        prop_assume!(f.iter().sum::<f64>() > 0.0);
        let fd = density(f.clone());
        let gd = density(g.clone());
        let got = majorization_failure(&fd, &gd, DEFAULT_TOL).unwrap().is_none();
        let h = 1.0 / f.len() as f64;
        let f_scaled: Vec<f64> = f.iter().map(|v| v * h).collect();
        let g_scaled: Vec<f64> = g.iter().map(|v| v * h).collect();
        prop_assert_eq!(got, subset_oracle(&f_scaled, &g_scaled, 1e-12));
    }

    #[test]
    fn cumulative_matches_breakpoint_oracle((f, g) in small_step_pair()) {
        let fd = density(f.clone());
        let gd = density(g.clone());
        let got = majorization_failure(&fd, &gd, DEFAULT_TOL).unwrap().is_none();
        prop_assert_eq!(got, breakpoint_oracle(&f, &g, 1e-12));
    }

    #[test]
    fn hinge_integral_matches_direct_sum((f, _) in small_step_pair(), a in 0.0f64..6.0) {
        let d = density(f.clone());
        prop_assert!((hinge_integral(&d, a) - hinge(&f, a)).abs() < 1e-12);
    }

    #[test]
    fn discrete_f64_agrees_with_rationals((v, w) in (2usize..10).prop_flat_map(|n| (prop::collection::vec(0u16..1000, n), prop::collection::vec(0u16..1000, n)))) {
        let as_f64 = |x: &[u16]| x.iter().map(|&a| f64::from(a) / 8.0).collect::<Vec<_>>();
        let as_ratio = |x: &[u16]| x.iter().map(|&a| Ratio::new(i64::from(a), 8)).collect::<Vec<_>>();
        let exact = compare_discrete(&as_ratio(&v), &as_ratio(&w)).unwrap().relation;
        prop_assert_eq!(compare_discrete(&as_f64(&v), &as_f64(&w)).unwrap().relation, exact);
    }
}

#[test]
fn rearrangement_sums_match_brute_force() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let n = rng.gen_range(2..10);
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..3.0)).collect();
        let sorted = majorize::majorization::decreasing_rearrangement(&density(v.clone()));
        for k in 1..=n {
            let top: f64 = sorted.values()[..k].iter().sum();
            assert!((top - brute_top_k(&v, k)).abs() < 1e-12);
        }
    }
}

#[test]
fn hinge_witness_separates_incomparable_pair() {
    let f = density(vec![1.8, 0.6, 0.6]);
    let g = density(vec![1.5, 1.35, 0.15]);
    assert_eq!(compare_continuous(&f, &g, DEFAULT_TOL).unwrap().relation, Relation::Incomparable);
    let th = hinge_thresholds(&f, &g, 200);
    let a = hinge_witness(&f, &g, &th).unwrap().expect("f ≺ g fails");
    assert!(hinge(f.values(), a) > hinge(g.values(), a));
    let b = hinge_witness(&g, &f, &th).unwrap().expect("g ≺ f fails");
    assert!(hinge(g.values(), b) > hinge(f.values(), b));
}

#[test]
fn every_battery_member_respects_order() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let battery = Battery::standard().with_hinge_grid(8.0, 33).unwrap();
    for _ in 0..200 {
        let n = rng.gen_range(2..32);
        let g: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..4.0)).collect();
        let mut f = g.clone();
        for _ in 0..5 {
            let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
            let (hi, lo) = if f[i] >= f[j] { (i, j) } else { (j, i) };
            let d = rng.gen_range(0.0..=1.0) * (f[hi] - f[lo]);
            f[hi] -= d;
            f[lo] += d;
        }
        let (fd, gd) = (density(f), density(g));
        for phi in battery.iter() {
            let (lf, lg) = (lambda(&fd, phi.as_ref()), lambda(&gd, phi.as_ref()));
            assert!(lf <= lg + 1e-9 * lg.abs().max(1.0), "{}: {lf} > {lg}", phi.id());
        }
    }
}

#[test]
fn discrete_handles_huge_rationals() {
    let big = BigRational::from_integer("150000000000000000000".parse::<BigInt>().unwrap());
    let one = BigRational::from_integer(BigInt::from(1));
    let x = vec![big.clone(), one.clone(), one.clone()];
    let y = vec![big.clone() + one.clone(), one.clone(), BigRational::from_integer(BigInt::from(0))];
    assert!(compare_discrete(&x, &y).unwrap().is_majorized_by());
    let xlogx = lookup("xlogx").unwrap();
    assert_eq!(xlogx.eval(0.0), 0.0);
}
