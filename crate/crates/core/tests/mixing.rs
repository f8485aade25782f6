use std::f64::consts::PI;

use majorize::mixing::{
    correlation, correlation_series, estimate_invariant_density, golden_alpha, interval_measure, l1_norm_sequence,
    mixing_verdict, preimage_measure, MapSystem, MixingOptions, MixingVerdict, Observable,
};
use majorize::{Density, Error, Grid};

/// `1/(π√(x(1−x)))` integrated over each cell.
fn logistic_exact(grid: Grid) -> Density {
    let cdf = |x: f64| 2.0 / PI * x.sqrt().asin();
    let h = grid.h();
    Density::new(
        grid,
        (0..grid.n_cells())
            .map(|i| (cdf((i + 1) as f64 * h) - cdf(i as f64 * h)) / h)
            .collect(),
    )
    .unwrap()
}

#[test]
fn logistic_histogram_matches_arcsine_law() {
    let grid = Grid::new(32).unwrap();
    let sys = MapSystem::from_spec("logistic", 3).unwrap();
    let est = estimate_invariant_density(&sys, 1000, 2_000_000, grid).unwrap();
    let exact = logistic_exact(grid);
    for (i, (a, b)) in est.values().iter().zip(exact.values()).enumerate() {
        assert!((a - b).abs() < 0.03 * b, "cell {i}: {a} vs {b}");
    }
}

#[test]
fn full_shift_maps_have_flat_histograms() {
    let grid = Grid::new(16).unwrap();
    for spec in ["doubling", "tent"] {
        let sys = MapSystem::from_spec(spec, 1).unwrap();
        let est = estimate_invariant_density(&sys, 100, 1_000_000, grid).unwrap();
        assert!((est.mass() - 1.0).abs() < 1e-12);
        for v in est.values() {
            assert!((v - 1.0).abs() < 0.03, "{spec}: {v}");
        }
    }
}

#[test]
fn identity_orbit_is_degenerate() {
    let sys = MapSystem::from_spec("identity", 0).unwrap();
    assert!(matches!(
        estimate_invariant_density(&sys, 10, 10_000, Grid::new(16).unwrap()),
        Err(Error::DegenerateOrbit { .. })
    ));
    assert!(estimate_invariant_density(&sys, 10, 9_999, Grid::new(16).unwrap()).is_err());
}

#[test]
fn invariant_measure_of_dyadic_intervals() {
    let grid = Grid::new(64).unwrap();
    for (spec, rho) in [
        ("logistic", logistic_exact(grid)),
        ("doubling", Density::uniform(grid)),
        ("tent", Density::uniform(grid)),
    ] {
        let sys = MapSystem::from_spec(spec, 0).unwrap();
        for k in 0..8 {
            let (a, b) = (k as f64 / 8.0, (k + 1) as f64 / 8.0);
            let direct = interval_measure(&rho, a, b);
            let pulled = preimage_measure(&sys, &rho, a, b, 200_000).unwrap();
            assert!((direct - pulled).abs() < 0.03 * direct, "{spec} [{a},{b}]: {direct} vs {pulled}");
        }
    }
}

#[test]
fn zero_lag_correlation_is_inner_product() {
    let grid = Grid::new(128).unwrap();
    let f = Observable::from_fn(grid, |x| (2.0 * PI * x).cos()).unwrap();
    let g = Observable::from_fn(grid, |x| x * x).unwrap();
    let sys = MapSystem::from_spec("logistic", 0).unwrap();
    let direct: f64 = f.values().iter().zip(g.values()).map(|(a, b)| a * b).sum::<f64>() * grid.h();
    // 128 nodes per cell reproduce the cell-average exactly.
    assert!((correlation(&sys, &f, &g, 0, 128 * 128).unwrap() - direct).abs() < 1e-10);
    let one = Observable::from_fn(grid, |_| 1.0).unwrap();
    assert!((correlation(&sys, &one, &one, 0, 1000).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn rotation_correlation_oscillates() {
    let grid = Grid::new(4096).unwrap();
    let f = Observable::from_fn(grid, |x| (2.0 * PI * x).cos()).unwrap();
    let sys = MapSystem::from_spec("rotation:golden", 0).unwrap();
    let series = correlation_series(&sys, &[(&f, &f)], 0, 30, 100_000).unwrap();
    let alpha = golden_alpha();
    for (n, c) in series[0].iter().enumerate() {
        let expected = 0.5 * (2.0 * PI * n as f64 * alpha).cos();
        assert!((c - expected).abs() < 2e-3, "n = {n}: {c} vs {expected}");
    }
}

#[test]
fn measure_preserving_maps_keep_l1_norm() {
    let grid = Grid::new(256).unwrap();
    let f = Observable::from_fn(grid, |x| x).unwrap();
    let sys = MapSystem::from_spec("doubling", 0).unwrap();
    let seq = l1_norm_sequence(&sys, &f, 10, 200_000).unwrap();
    for v in &seq {
        assert!((v - seq[0]).abs() < 2e-3);
    }
    let id = MapSystem::from_spec("identity", 0).unwrap();
    let flat = l1_norm_sequence(&id, &f, 5, 1000).unwrap();
    assert!(flat.iter().all(|v| *v == flat[0]));
}

#[test]
fn constant_pair_is_trivially_mixing() {
    let grid = Grid::new(32).unwrap();
    let sys = MapSystem::from_spec("tent", 0)
        .unwrap()
        .with_invariant_density(Density::uniform(grid));
    let c = Observable::from_fn(grid, |_| 0.7).unwrap();
    let opts = MixingOptions {
        n_max: 10,
        n_points: 10_000,
        ..MixingOptions::default()
    };
    let r = mixing_verdict(&sys, &[c.clone(), c], &opts).unwrap();
    assert!(r.all_consistent());
    assert!(r.pairs.iter().all(|p| p.n_settle == Some(0)));
}

#[test]
fn verdicts_are_reproducible() {
    let grid = Grid::new(64).unwrap();
    let opts = MixingOptions {
        n_max: 25,
        n_points: 50_000,
        n_samples: 100_000,
        density_grid: 64,
        ..MixingOptions::default()
    };
    let obs = vec![
        Observable::from_fn(grid, |x| (2.0 * PI * x).cos()).unwrap(),
        Observable::from_fn(grid, |x| x - 0.5).unwrap(),
    ];
    let run = || mixing_verdict(&MapSystem::from_spec("logistic", 42).unwrap(), &obs, &opts).unwrap();
    assert_eq!(run(), run());
    let rot = mixing_verdict(&MapSystem::from_spec("rotation:golden", 42).unwrap(), &obs, &opts).unwrap();
    assert!(matches!(rot.pairs[0].verdict, MixingVerdict::NotMixingEvidence { .. }));
}
