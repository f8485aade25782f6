//! Built-in scenarios run by `majorize demo`.

use std::path::{Path, PathBuf};

use anyhow::Result;
use majorize::density::{Density, Grid};
use majorize::io;
use majorize::trajectory::{Source, Trajectory};

use crate::config::{Engine, Expect, FpeBlock, MixingBlock, QuantumBlock, ScenarioConfig, VerifyBlock};
use crate::run::{self, EXIT_ERROR, EXIT_OK, EXIT_VIOLATION};

pub struct DemoScenario {
    pub name: &'static str,
    pub about: &'static str,
    /// Exit code the scenario is expected to produce.
    pub expect: i32,
    build: fn(&Path) -> Result<ScenarioConfig>,
}

impl DemoScenario {
    pub fn config(&self, root: &Path, seed: u64) -> Result<ScenarioConfig> {
        let mut cfg = (self.build)(root)?;
        cfg.output_dir = Some(root.join(self.name));
        cfg.seed = seed;
        Ok(cfg)
    }
}

fn base(engine: Engine) -> ScenarioConfig {
    ScenarioConfig {
        engine,
        output_dir: None,
        seed: 0,
        battery: None,
        fpe: None,
        quantum: None,
        mixing: None,
        verify: None,
    }
}

fn lin(start: f64, end: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| start + (end - start) * i as f64 / (count - 1) as f64)
        .collect()
}

/// Three snapshots on 8 cells whose entropy rises while `∫p²` also rises:
/// the second law holds but the majorized second law fails.
pub fn concentrating_trajectory() -> Trajectory {
    let g = Grid::new(8).expect("8 cells");
    let rows: [[f64; 8]; 3] = [
        [2.0, 2.0, 2.0, 2.0, 0.0, 0.0, 0.0, 0.0],
        [3.0, 2.75, 1.0, 0.5, 0.5, 0.25, 0.0, 0.0],
        [4.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5],
    ];
    Trajectory::from_pairs(
        rows.iter()
            .enumerate()
            .map(|(k, r)| (k as f64, Density::new(g, r.to_vec()).expect("valid density"))),
        Source::File,
    )
    .expect("increasing times")
}

fn heat(_: &Path) -> Result<ScenarioConfig> {
    Ok(ScenarioConfig {
        fpe: Some(FpeBlock {
            model: "linear".into(),
            d: 1.0,
            nu: 1.0,
            grid: 256,
            t_end: 0.2,
            snapshots: vec![0.0, 0.01, 0.05, 0.2],
            init: "builtin:cosine".into(),
            dt: 0.0,
        }),
        ..base(Engine::Fpe)
    })
}

fn heat_reversed(root: &Path) -> Result<ScenarioConfig> {
    Ok(ScenarioConfig {
        verify: Some(VerifyBlock {
            input: root.join("heat").to_string_lossy().into_owned(),
            tol: majorize::majorization::DEFAULT_TOL,
            msl_tol: majorize::chain::DEFAULT_MSL_TOL,
            full_pairwise: true,
            weak: false,
            reverse: true,
            p_inf: None,
        }),
        ..base(Engine::Verify)
    })
}

fn porous(_: &Path) -> Result<ScenarioConfig> {
    Ok(ScenarioConfig {
        fpe: Some(FpeBlock {
            model: "porous".into(),
            d: 1.0,
            nu: 2.0,
            grid: 128,
            t_end: 0.5,
            snapshots: lin(0.0, 0.5, 50),
            init: "builtin:bump".into(),
            dt: 0.0,
        }),
        ..base(Engine::Fpe)
    })
}

fn quantum(gamma: f64) -> ScenarioConfig {
    ScenarioConfig {
        quantum: Some(QuantumBlock {
            mode: "sine:1".into(),
            epsilon: 1.0,
            gamma,
            hbar: 1.0,
            grid: 256,
            snapshots: lin(0.0, 10.0, 20),
        }),
        ..base(Engine::Quantum)
    }
}

fn mixing(map: &str, expect: Expect) -> ScenarioConfig {
    ScenarioConfig {
        mixing: Some(MixingBlock {
            map: map.into(),
            n_max: 40,
            points: 200_000,
            tol: 0.02,
            expect,
            density_grid: 256,
            samples: 1_000_000,
        }),
        ..base(Engine::Mixing)
    }
}

fn msl_vs_sl(root: &Path) -> Result<ScenarioConfig> {
    let input: PathBuf = root.join("msl-vs-sl").join("input");
    io::save_trajectory(&concentrating_trajectory(), &input)?;
    Ok(ScenarioConfig {
        verify: Some(VerifyBlock {
            input: input.to_string_lossy().into_owned(),
            tol: majorize::majorization::DEFAULT_TOL,
            msl_tol: majorize::chain::DEFAULT_MSL_TOL,
            full_pairwise: false,
            weak: false,
            reverse: false,
            p_inf: None,
        }),
        ..base(Engine::Verify)
    })
}

pub fn scenarios() -> Vec<DemoScenario> {
    vec![
        DemoScenario {
            name: "heat",
            about: "heat equation from 1 + cos(pi x)",
            expect: EXIT_OK,
            build: heat,
        },
        DemoScenario {
            name: "heat-reversed",
            about: "the heat trajectory played backwards",
            expect: EXIT_VIOLATION,
            build: heat_reversed,
        },
        DemoScenario {
            name: "porous",
            about: "porous medium equation from a centered bump",
            expect: EXIT_OK,
            build: porous,
        },
        DemoScenario {
            name: "quantum-hermitian",
            about: "stationary sine mode, gamma = 0",
            expect: EXIT_OK,
            build: |_| Ok(quantum(0.0)),
        },
        DemoScenario {
            name: "quantum-decay",
            about: "decaying sine mode, gamma = -0.1",
            expect: EXIT_OK,
            build: |_| Ok(quantum(-0.1)),
        },
        DemoScenario {
            name: "mixing-logistic",
            about: "logistic map 4x(1-x)",
            expect: EXIT_OK,
            build: |_| Ok(mixing("logistic", Expect::Mixing)),
        },
        DemoScenario {
            name: "mixing-rotation",
            about: "golden-ratio rotation",
            expect: EXIT_OK,
            build: |_| Ok(mixing("rotation:golden", Expect::NotMixing)),
        },
        DemoScenario {
            name: "msl-vs-sl",
            about: "entropy rises while mass concentrates",
            expect: EXIT_VIOLATION,
            build: msl_vs_sl,
        },
    ]
}

/// Runs the named scenarios (all when `only` is empty) under `root`.
/// Returns 0 when every scenario produced its expected exit code.
pub fn run_demo(root: &Path, seed: u64, only: &[String]) -> i32 {
    let mut all_expected = true;
    for sc in scenarios() {
        if !only.is_empty() && !only.iter().any(|n| n == sc.name) {
            continue;
        }
        println!("== {} ({})", sc.name, sc.about);
        let code = match sc.config(root, seed) {
            Ok(cfg) => run::run_scenario(&cfg),
            Err(e) => {
                eprintln!("error: {e:#}");
                EXIT_ERROR
            }
        };
        let ok = code == sc.expect;
        all_expected &= ok;
        println!(
            "{} {}: exit {} (expected {})",
            if ok { "OK" } else { "UNEXPECTED" },
            sc.name,
            code,
            sc.expect
        );
    }
    if all_expected {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use majorize::convex::{lambda, lookup};

    #[test]
    fn concentrating_trajectory_raises_entropy_and_x2() {
        let t = concentrating_trajectory();
        let (xlogx, x2) = (lookup("xlogx").unwrap(), lookup("x2").unwrap());
        for w in t.snapshots().windows(2) {
            assert!(lambda(&w[1].density, xlogx.as_ref()) < lambda(&w[0].density, xlogx.as_ref()));
            assert!(lambda(&w[1].density, x2.as_ref()) > lambda(&w[0].density, x2.as_ref()));
            assert!((w[1].density.mass() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn scenario_names_are_unique() {
        let names: Vec<_> = scenarios().iter().map(|s| s.name).collect();
        let mut dedup = names.clone();
        dedup.sort_unstable();
        dedup.dedup();
        assert_eq!(names.len(), dedup.len());
    }
}
