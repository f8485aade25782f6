//! Engine dispatch. Each runner writes its CSVs, prints one verdict line per
//! check and returns the list of checks.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use majorize::chain::{verify_lemma1_equivalence, verify_trajectory, ChainOptions, ChainReport};
use majorize::convex::Battery;
use majorize::density::{Density, Grid};
use majorize::fpe::{self, fpe_evolve, lambda_prime_rhs, FpeParams, FpeRunConfig};
use majorize::io::{self, fmt_f64, LambdaRow};
use majorize::mixing::{default_observables, estimate_invariant_density, mixing_verdict, MapSystem, MixingOptions};
use majorize::quantum::{lambda_prime_from_density, nonhermitian_bound_check, quantum_trajectory, QuantumMode};
use majorize::trajectory::{Source, Trajectory};
use majorize::{lambda, Error};

use crate::config::{Engine, Expect, FpeBlock, MixingBlock, QuantumBlock, ScenarioConfig, VerifyBlock};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub checks: Vec<CheckLine>,
}

impl Outcome {
    fn push(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        let line = CheckLine {
            name: name.to_string(),
            pass,
            detail: detail.into(),
        };
        println!("{} {}: {}", if pass { "PASS" } else { "FAIL" }, line.name, line.detail);
        self.checks.push(line);
    }

    /// Records a line that is informational only.
    fn note(&mut self, name: &str, detail: impl Into<String>) {
        let detail = detail.into();
        println!("INFO {name}: {detail}");
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            EXIT_OK
        } else {
            EXIT_VIOLATION
        }
    }

    fn write_summary(&self, dir: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
        w.write_record(["check", "pass", "detail"])?;
        for c in &self.checks {
            w.write_record([c.name.as_str(), if c.pass { "true" } else { "false" }, c.detail.as_str()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs a validated scenario. Errors map to exit code 1.
pub fn run_scenario(cfg: &ScenarioConfig) -> i32 {
    match try_run(cfg) {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

pub fn try_run(cfg: &ScenarioConfig) -> Result<Outcome> {
    cfg.validate()?;
    let out = cfg.output_dir();
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let battery = cfg.battery()?;
    let outcome = match cfg.engine {
        Engine::Fpe => run_fpe(cfg.fpe.as_ref().expect("validated"), &battery, cfg.seed, &out)?,
        Engine::Quantum => run_quantum(cfg.quantum.as_ref().expect("validated"), &battery, cfg.seed, &out)?,
        Engine::Mixing => run_mixing(cfg.mixing.as_ref().expect("validated"), cfg.seed, &out)?,
        Engine::Verify => run_verify(cfg.verify.as_ref().expect("validated"), &battery, cfg.seed, &out)?,
    };
    outcome.write_summary(&out)?;
    Ok(outcome)
}

pub fn load_initial(spec: &str, grid: Grid) -> Result<Density> {
    match spec.strip_prefix("builtin:") {
        Some(name) => Ok(fpe::initial_condition(name, grid)?),
        None => {
            let d = io::read_density(Path::new(spec))?;
            grid.check_same(&d.grid())?;
            Ok(d)
        }
    }
}

fn lambda_rows(traj: &Trajectory, battery: &Battery) -> Result<Vec<LambdaRow>> {
    let mut rows = Vec::new();
    for s in traj.snapshots() {
        for phi in battery.iter() {
            let rate = if !phi.differentiable() {
                None
            } else {
                match traj.source() {
                    Source::Fpe(model) if model.is_force_free() => {
                        Some(lambda_prime_rhs(&s.density, model.as_ref(), phi.as_ref())?)
                    }
                    Source::Quantum { gamma, hbar } => {
                        Some(lambda_prime_from_density(&s.density, *gamma, *hbar, phi.as_ref())?)
                    }
                    _ => None,
                }
            };
            rows.push(LambdaRow {
                t: s.t,
                phi_id: phi.id().to_string(),
                lambda: lambda(&s.density, phi.as_ref()),
                lambda_prime_rhs: rate,
            });
        }
    }
    Ok(rows)
}

fn chain_lines(outcome: &mut Outcome, report: &ChainReport, weak: bool) {
    let first = |check: &str| {
        report
            .violations
            .iter()
            .find(|v| v.check.as_str() == check)
            .map(|v| format!("first violation t={} -> t={} witness {} magnitude {}", v.t1, v.t2, v.witness, fmt_f64(v.magnitude)))
            .unwrap_or_else(|| "no violations".into())
    };
    if weak {
        outcome.push("weak_chain", report.weak_chain_holds, first("weak_chain"));
        outcome.note("chain", format!("strict chain holds = {}", report.chain_holds));
    } else {
        outcome.push("chain", report.chain_holds, first("chain"));
    }
    outcome.push("msl", report.msl_holds, first("msl"));
    if weak {
        outcome.note("sl", format!("entropy non-decreasing = {}", report.sl_holds));
    } else {
        outcome.push("sl", report.sl_holds, first("sl"));
    }
    if let Some(s) = &report.sandwich {
        let label = if s.asymptotic_surrogate { " (asymptotic-surrogate)" } else { "" };
        if weak {
            outcome.push("weak_sandwich", s.weak_holds, format!("p_inf <=w p_t <=w p_0{label}"));
        } else {
            outcome.push("sandwich", s.holds, format!("p_inf < p_t < p_0{label}"));
        }
        outcome.note("stationary", format!("max |lambda'(p_inf)| = {}", fmt_f64(s.max_residual())));
    }
    outcome.push("implications", report.implications_hold, "chain => msl => sl");
}

fn chain_opts(seed: u64) -> ChainOptions {
    ChainOptions {
        seed,
        ..ChainOptions::default()
    }
}

pub fn run_fpe(b: &FpeBlock, battery: &Battery, seed: u64, out: &Path) -> Result<Outcome> {
    let grid = Grid::new(b.grid()?)?;
    let params = FpeParams {
        d: b.d,
        nu: b.nu,
        ..FpeParams::default()
    };
    let model = fpe::lookup(&b.model, &params)?;
    let p0 = load_initial(&b.init, grid)?;
    let mut run = FpeRunConfig::new(grid, b.t_end, b.snapshots.clone());
    run.dt = b.dt;
    let traj = fpe_evolve(&p0, Arc::clone(&model), &run)?;
    io::save_trajectory(&traj, out)?;
    io::write_lambda_csv(&out.join("lambda.csv"), &lambda_rows(&traj, battery)?)?;
    let report = verify_trajectory(&traj, battery, None, &chain_opts(seed))?;
    io::write_report_csv(&out.join("report.csv"), &report.rows)?;

    let mut outcome = Outcome::default();
    let m0 = p0.mass();
    let drift = traj
        .snapshots()
        .iter()
        .map(|s| ((s.density.mass() - m0) / m0).abs())
        .fold(0.0, f64::max);
    outcome.note("mass_drift", fmt_f64(drift));
    chain_lines(&mut outcome, &report, false);
    Ok(outcome)
}

pub fn run_quantum(b: &QuantumBlock, battery: &Battery, seed: u64, out: &Path) -> Result<Outcome> {
    let grid = Grid::new(b.grid()?)?;
    let mode = QuantumMode::from_spec(&b.mode, grid, b.epsilon, b.gamma, b.hbar)?;
    let traj = quantum_trajectory(&mode, &b.snapshots)?;
    io::save_trajectory(&traj, out)?;
    io::write_lambda_csv(&out.join("lambda.csv"), &lambda_rows(&traj, battery)?)?;
    let weak = b.gamma < 0.0;
    let mut outcome = Outcome::default();
    if weak {
        let mut rows = Vec::new();
        for &t in &b.snapshots {
            for phi in battery.differentiable().filter(|p| p.increasing()) {
                rows.push((t, phi.id().to_string(), nonhermitian_bound_check(&mode, t, phi.as_ref())?));
            }
        }
        io::write_bound_csv(&out.join("bound.csv"), &rows)?;
        let holds = rows.iter().all(|(_, _, c)| c.holds);
        let bare = rows.iter().all(|(_, _, c)| c.holds_bare);
        outcome.push("decay_bound", holds, format!("{} (t, phi) pairs", rows.len()));
        outcome.note("decay_bound_without_norm", format!("holds = {bare}"));
    }
    let report = verify_trajectory(&traj, battery, None, &chain_opts(seed))?;
    io::write_report_csv(&out.join("report.csv"), &report.rows)?;
    chain_lines(&mut outcome, &report, weak);
    Ok(outcome)
}

pub fn run_mixing(b: &MixingBlock, seed: u64, out: &Path) -> Result<Outcome> {
    let opts = MixingOptions {
        n_max: b.n_max,
        n_points: b.points,
        tol: b.tol,
        density_grid: b.density_grid,
        n_samples: b.samples,
        ..MixingOptions::default()
    };
    let sys = MapSystem::from_spec(&b.map, seed)?;
    let grid = Grid::new(opts.density_grid)?;
    let rho = estimate_invariant_density(&sys, opts.n_transient, opts.n_samples, grid)?;
    io::write_density(&out.join("invariant_density.csv"), &rho)?;
    let observables = default_observables(grid, &rho)?;
    let sys = sys.with_invariant_density(rho);
    let report = mixing_verdict(&sys, &observables, &opts)?;
    io::write_correlations_csv(&out.join("correlations.csv"), &report)?;

    let mut outcome = Outcome::default();
    for p in &report.pairs {
        outcome.note(&p.pair_id, format!("{} limit {}", p.verdict, fmt_f64(p.limit)));
    }
    let consistent = report.all_consistent();
    let (pass, what) = match b.expect {
        Expect::Mixing => (consistent, "mixing-consistent"),
        Expect::NotMixing => (!consistent, "not-mixing-evidence"),
    };
    outcome.push("mixing", pass, format!("{} expected {what}", report.map));
    Ok(outcome)
}

pub fn run_verify(b: &VerifyBlock, battery: &Battery, seed: u64, out: &Path) -> Result<Outcome> {
    let mut traj = io::load_trajectory(&b.input)?;
    if b.reverse {
        traj = traj.reversed();
    }
    let p_inf = b.p_inf.as_deref().map(io::read_density).transpose()?;
    let opts = ChainOptions {
        tol: b.tol,
        msl_tol: b.msl_tol,
        full_pairwise: b.full_pairwise,
        seed,
        ..ChainOptions::default()
    };
    let report = verify_trajectory(&traj, battery, p_inf.as_ref(), &opts)?;
    io::write_report_csv(&out.join("report.csv"), &report.rows)?;
    let mut outcome = Outcome::default();
    chain_lines(&mut outcome, &report, b.weak);
    if traj.len() >= 3 {
        let l1 = verify_lemma1_equivalence(&traj, battery, &opts)?;
        let detail = match l1.disagreement {
            None => "chain and battery verdicts agree".to_string(),
            Some(d) => format!("{d:?}"),
        };
        outcome.note("lemma1", detail);
    }
    Ok(outcome)
}

/// Compares two density files and prints the relation.
pub fn check_pair(a: &Path, b: &Path, tol: f64) -> Result<majorize::Verdict> {
    let f = io::read_density(a)?;
    let g = io::read_density(b)?;
    match majorize::compare_continuous(&f, &g, tol) {
        Err(Error::GridMismatch { left, right }) => bail!("grids differ: {left} vs {right} cells"),
        other => Ok(other?),
    }
}
