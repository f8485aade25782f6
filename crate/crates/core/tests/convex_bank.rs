use majorize::convex::{lambda, lookup, registry, schur_samples, Battery, SchurClass, STANDARD_IDS};
use majorize::{Density, Grid};
use proptest::prelude::*;

const IDS: &[&str] = &[
    "xlogx", "x", "x2", "x1.5", "x3", "pow:2.5", "exp", "abs", "absdev:0.3", "hinge:0.5",
];

proptest! {
    #[test]
    fn midpoint_convex(x in 0.0f64..10.0, y in 0.0f64..10.0) {
        for id in IDS {
            let phi = lookup(id).unwrap();
            let mid = phi.eval(0.5 * (x + y));
            let avg = 0.5 * (phi.eval(x) + phi.eval(y));
            prop_assert!(mid <= avg + 1e-12 * avg.abs().max(1.0), "{id} at {x}, {y}");
        }
    }

    #[test]
    fn derivatives_match_finite_differences(x in 0.05f64..5.0) {
        for id in IDS {
            let phi = lookup(id).unwrap();
            if !phi.differentiable() {
                continue;
            }
            let h = 1e-5;
            let fd1 = (phi.eval(x + h) - phi.eval(x - h)) / (2.0 * h);
            let fd2 = (phi.eval(x + h) - 2.0 * phi.eval(x) + phi.eval(x - h)) / (h * h);
            let scale = phi.d1(x).abs().max(1.0);
            prop_assert!((fd1 - phi.d1(x)).abs() < 1e-5 * scale, "{id} d1 at {x}");
            let scale2 = phi.d2(x).abs().max(1.0);
            prop_assert!((fd2 - phi.d2(x)).abs() < 1e-2 * scale2, "{id} d2 at {x}");
            prop_assert!(phi.d2(x) >= 0.0);
        }
    }

    #[test]
    fn increasing_flag_is_honest(x in 0.0f64..10.0, dx in 0.0f64..1.0) {
        for id in IDS {
            let phi = lookup(id).unwrap();
            if phi.increasing() {
                prop_assert!(phi.eval(x + dx) >= phi.eval(x), "{id}");
            }
        }
    }

    #[test]
    fn schur_samples_follow_transfers(
        v in prop::collection::vec(0.0f64..5.0, 2..10),
        i in any::<prop::sample::Index>(),
        j in any::<prop::sample::Index>(),
        frac in 0.0f64..=1.0,
    ) {
        let n = v.len();
        let (i, j) = (i.index(n), j.index(n));
        let (hi, lo) = if v[i] >= v[j] { (i, j) } else { (j, i) };
        let mut w = v.clone();
        let d = frac * (v[hi] - v[lo]);
        w[hi] -= d;
        w[lo] += d;
        for s in schur_samples(n).unwrap() {
            let (a, b) = (s.eval(&w), s.eval(&v));
            prop_assert!(a <= b + 1e-9 * b.abs().max(1.0), "{} rose under a transfer", s.id);
        }
    }
}

#[test]
fn lambda_of_uniform_is_phi_of_one() {
    let u = Density::uniform(Grid::new(64).unwrap());
    for id in STANDARD_IDS {
        let phi = lookup(id).unwrap();
        assert!((lambda(&u, phi.as_ref()) - phi.eval(1.0)).abs() < 1e-14, "{id}");
    }
}

#[test]
fn lambda_x2_of_cosine_profile() {
    // ∫(1 + cos πx)² dx = 3/2
    let d = Density::from_fn(Grid::new(4096).unwrap(), |x| 1.0 + (std::f64::consts::PI * x).cos()).unwrap();
    let x2 = lookup("x2").unwrap();
    assert!((lambda(&d, x2.as_ref()) - 1.5).abs() < 1e-6);
}

#[test]
fn registry_lists_every_family() {
    let names: Vec<_> = registry().names().collect();
    for n in ["xlogx", "pow", "exp", "absdev", "hinge"] {
        assert!(names.contains(&n), "{n}");
    }
    assert!(lookup("pow:0.5").is_err());
    assert!(lookup("hinge").is_err());
    assert!(lookup("sqrt").is_err());
}

#[test]
fn standard_battery_has_entropy_and_hinges() {
    let b = Battery::standard();
    assert_eq!(b.len(), STANDARD_IDS.len());
    assert!(b.get("xlogx").is_some());
    assert_eq!(b.iter().filter(|m| m.id().starts_with("hinge:")).count(), 5);
    assert!(Battery::from_ids(&["x2", "x2"]).is_err());
}

#[test]
fn schur_classes() {
    let s = schur_samples(5).unwrap();
    assert!(s.iter().any(|f| f.class == SchurClass::QuasiConvex));
    assert!(s.iter().any(|f| f.id == "top2_sum"));
    assert!(schur_samples(1).is_err());
}
