use majorize::majorization::{
    compare_continuous, compare_discrete, compare_weak, decreasing_rearrangement, majorization_failure, Relation,
    DEFAULT_TOL,
};
use majorize::{Density, Grid};
use num_rational::Ratio;
use proptest::prelude::*;

fn density(values: Vec<f64>) -> Density {
    Density::new(Grid::new(values.len()).unwrap(), values).unwrap()
}

fn prob_values(n: usize) -> impl Strategy<Value = Density> {
    prop::collection::vec(0.0f64..10.0, n)
        .prop_filter("non-zero", |v| v.iter().sum::<f64>() > 1e-3)
        .prop_map(|v| density(v).normalized().unwrap())
}

fn prob_density() -> impl Strategy<Value = Density> {
    (2usize..24).prop_flat_map(prob_values)
}

fn prob_pair() -> impl Strategy<Value = (Density, Density)> {
    (2usize..24).prop_flat_map(|n| (prob_values(n), prob_values(n)))
}

/// Moves `frac` of the gap from a larger cell to a smaller one.
fn robin_hood(values: &[f64], i: usize, j: usize, frac: f64) -> Vec<f64> {
    let mut v = values.to_vec();
    let (hi, lo) = if v[i] >= v[j] { (i, j) } else { (j, i) };
    let delta = frac * (v[hi] - v[lo]);
    v[hi] -= delta;
    v[lo] += delta;
    v
}

fn transfers() -> impl Strategy<Value = Vec<(prop::sample::Index, prop::sample::Index, f64)>> {
    prop::collection::vec((any::<prop::sample::Index>(), any::<prop::sample::Index>(), 0.0f64..=1.0), 1..6)
}

fn apply(values: &[f64], moves: &[(prop::sample::Index, prop::sample::Index, f64)]) -> Vec<f64> {
    let n = values.len();
    moves
        .iter()
        .fold(values.to_vec(), |v, (i, j, f)| robin_hood(&v, i.index(n), j.index(n), *f))
}

proptest! {
    #[test]
    fn reflexive(p in prob_density()) {
        let v = compare_continuous(&p, &p, DEFAULT_TOL).unwrap();
        prop_assert_eq!(v.relation, Relation::Equivalent);
    }

    #[test]
    fn robin_hood_moves_down(p in prob_density(), moves in transfers()) {
        let q = density(apply(p.values(), &moves));
        prop_assert!(majorization_failure(&q, &p, DEFAULT_TOL).unwrap().is_none());
    }

    #[test]
    fn transitive_on_chains(p in prob_density(), m1 in transfers(), m2 in transfers()) {
        let q = density(apply(p.values(), &m1));
        let r = density(apply(q.values(), &m2));
        prop_assert!(compare_continuous(&q, &p, DEFAULT_TOL).unwrap().is_majorized_by());
        prop_assert!(compare_continuous(&r, &q, DEFAULT_TOL).unwrap().is_majorized_by());
        prop_assert!(compare_continuous(&r, &p, DEFAULT_TOL).unwrap().is_majorized_by());
    }

    #[test]
    fn permutation_invariant(p in prob_density(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut v = p.values().to_vec();
        v.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let q = density(v);
        prop_assert_eq!(compare_continuous(&p, &q, DEFAULT_TOL).unwrap().relation, Relation::Equivalent);
        let (a, b) = (decreasing_rearrangement(&p), decreasing_rearrangement(&q));
        prop_assert_eq!(a.values(), b.values());
    }

    #[test]
    fn antisymmetric_up_to_rearrangement((p, q) in prob_pair()) {
        let v = compare_continuous(&p, &q, DEFAULT_TOL).unwrap();
        if v.relation == Relation::Equivalent {
            let (a, b) = (decreasing_rearrangement(&p), decreasing_rearrangement(&q));
            prop_assert!(a.max_abs_diff(&b).unwrap() < 1e-6);
        }
    }

    #[test]
    fn verdict_is_mirrored((p, q) in prob_pair()) {
        let pq = compare_continuous(&p, &q, DEFAULT_TOL).unwrap().relation;
        let qp = compare_continuous(&q, &p, DEFAULT_TOL).unwrap().relation;
        let mirrored = match pq {
            Relation::Majorizes => Relation::MajorizedBy,
            Relation::MajorizedBy => Relation::Majorizes,
            r => r,
        };
        prop_assert_eq!(qp, mirrored);
    }

    #[test]
    fn uniform_and_delta_bracket_everything(p in prob_density(), cell in any::<prop::sample::Index>()) {
        let g = p.grid();
        let delta = Density::delta(g, cell.index(g.n_cells()));
        prop_assert!(majorization_failure(&Density::uniform(g), &p, DEFAULT_TOL).unwrap().is_none());
        prop_assert!(majorization_failure(&p, &delta, DEFAULT_TOL).unwrap().is_none());
    }

    #[test]
    fn strict_implies_weak((p, q) in prob_pair(), s in 0.2f64..3.0) {
        let q = q.scaled(s).unwrap();
        let strict = compare_continuous(&p, &q, DEFAULT_TOL).unwrap();
        let weak = compare_weak(&p, &q, DEFAULT_TOL).unwrap();
        if strict.is_majorized_by() {
            prop_assert!(weak.is_majorized_by());
        }
    }

    #[test]
    fn discrete_robin_hood_is_exact(
        v in prop::collection::vec(0i64..50, 2..12),
        i in any::<prop::sample::Index>(),
        j in any::<prop::sample::Index>(),
        num in 0i64..=4,
    ) {
        let (i, j) = (i.index(v.len()), j.index(v.len()));
        let x: Vec<Ratio<i64>> = v.iter().map(|&a| Ratio::from_integer(a)).collect();
        let (hi, lo) = if x[i] >= x[j] { (i, j) } else { (j, i) };
        let delta = (x[hi] - x[lo]) * Ratio::new(num, 4);
        let mut y = x.clone();
        y[hi] -= delta;
        y[lo] += delta;
        let verdict = compare_discrete(&y, &x).unwrap();
        prop_assert!(verdict.is_majorized_by());
    }
}
