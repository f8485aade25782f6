use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use majorize::majorization::DEFAULT_TOL;
use majorize_cli::config::{self, Engine, Expect, FpeBlock, MixingBlock, QuantumBlock, ScenarioConfig, VerifyBlock};
use majorize_cli::run::{self, EXIT_ERROR, EXIT_OK};
use majorize_cli::{demo, parse_times};

#[derive(Parser)]
#[command(name = "majorize", version, about = "Majorization checks for density trajectories")]
struct Cli {
    /// Overrides the seed of any scenario.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, env = config::OUT_ENV)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compare two density CSV files.
    Check {
        f: PathBuf,
        g: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Evolve a Fokker-Planck equation and verify the trajectory.
    EvolveFpe {
        #[arg(long, default_value = "linear")]
        model: String,
        #[arg(long, default_value_t = 1.0)]
        d: f64,
        #[arg(long, default_value_t = 2.0)]
        nu: f64,
        #[arg(long, default_value_t = 256, allow_negative_numbers = true)]
        grid: i64,
        #[arg(long)]
        t_end: f64,
        /// `a,b,c` or `lin:start:end:count`
        #[arg(long)]
        snapshots: String,
        /// `builtin:<name>` or a density CSV path
        #[arg(long, default_value = "builtin:cosine")]
        init: String,
        #[arg(long, default_value_t = 0.0)]
        dt: f64,
        #[arg(long, value_delimiter = ',')]
        battery: Option<Vec<String>>,
    },
    /// Evaluate a quantum mode and verify the trajectory.
    EvolveQuantum {
        #[arg(long, default_value = "sine:1")]
        mode: String,
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        #[arg(long, default_value_t = 256, allow_negative_numbers = true)]
        grid: i64,
        #[arg(long)]
        snapshots: String,
        #[arg(long, value_delimiter = ',')]
        battery: Option<Vec<String>>,
    },
    /// Correlation-decay diagnostics for an interval map.
    Mixing {
        #[arg(long)]
        map: String,
        #[arg(long, default_value_t = 60)]
        n_max: usize,
        #[arg(long, default_value_t = 1_000_000)]
        points: usize,
        #[arg(long, default_value_t = 0.02)]
        tol: f64,
        /// Expect evidence against mixing instead of mixing.
        #[arg(long)]
        expect_not_mixing: bool,
    },
    /// Verify a trajectory stored as `t_<time>.csv` files.
    VerifyChain {
        /// Directory or glob pattern.
        #[arg(long = "in")]
        input: String,
        #[arg(long, value_delimiter = ',')]
        battery: Option<Vec<String>>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = majorize::chain::DEFAULT_MSL_TOL)]
        msl_tol: f64,
        #[arg(long)]
        full_pairwise: bool,
        #[arg(long)]
        weak: bool,
        #[arg(long)]
        reverse: bool,
        /// Density CSV to use as the infimum.
        #[arg(long)]
        p_inf: Option<PathBuf>,
    },
    /// Run the built-in scenarios.
    Demo {
        /// Only run these scenarios.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        /// List scenarios and exit.
        #[arg(long)]
        list: bool,
    },
    /// Run a TOML scenario file.
    Run { config: PathBuf },
}

fn scenario(engine: Engine, battery: Option<Vec<String>>) -> ScenarioConfig {
    ScenarioConfig {
        engine,
        output_dir: None,
        seed: 0,
        battery,
        fpe: None,
        quantum: None,
        mixing: None,
        verify: None,
    }
}

fn build(cmd: Cmd) -> anyhow::Result<Option<ScenarioConfig>> {
    Ok(Some(match cmd {
        Cmd::EvolveFpe {
            model,
            d,
            nu,
            grid,
            t_end,
            snapshots,
            init,
            dt,
            battery,
        } => ScenarioConfig {
            fpe: Some(FpeBlock {
                model,
                d,
                nu,
                grid,
                t_end,
                snapshots: parse_times(&snapshots)?,
                init,
                dt,
            }),
            ..scenario(Engine::Fpe, battery)
        },
        Cmd::EvolveQuantum {
            mode,
            epsilon,
            gamma,
            hbar,
            grid,
            snapshots,
            battery,
        } => ScenarioConfig {
            quantum: Some(QuantumBlock {
                mode,
                epsilon,
                gamma,
                hbar,
                grid,
                snapshots: parse_times(&snapshots)?,
            }),
            ..scenario(Engine::Quantum, battery)
        },
        Cmd::Mixing {
            map,
            n_max,
            points,
            tol,
            expect_not_mixing,
        } => ScenarioConfig {
            mixing: Some(MixingBlock {
                map,
                n_max,
                points,
                tol,
                expect: if expect_not_mixing { Expect::NotMixing } else { Expect::Mixing },
                density_grid: 256,
                samples: 1_000_000,
            }),
            ..scenario(Engine::Mixing, None)
        },
        Cmd::VerifyChain {
            input,
            battery,
            tol,
            msl_tol,
            full_pairwise,
            weak,
            reverse,
            p_inf,
        } => ScenarioConfig {
            verify: Some(VerifyBlock {
                input,
                tol,
                msl_tol,
                full_pairwise,
                weak,
                reverse,
                p_inf,
            }),
            ..scenario(Engine::Verify, battery)
        },
        Cmd::Run { config } => ScenarioConfig::load(&config)?,
        Cmd::Check { .. } | Cmd::Demo { .. } => return Ok(None),
    }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Check { f, g, tol } => match run::check_pair(&f, &g, tol) {
            Ok(v) => {
                println!("{}", v.relation);
                if let Some(w) = &v.witness {
                    println!("forward: {}", w.forward);
                    println!("backward: {}", w.backward);
                }
                EXIT_OK
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                EXIT_ERROR
            }
        },
        Cmd::Demo { only, list } => {
            if list {
                for s in demo::scenarios() {
                    println!("{:<18} {}", s.name, s.about);
                }
                EXIT_OK
            } else {
                let root = config::resolve_output_dir(cli.out).join("demo");
                demo::run_demo(&root, cli.seed.unwrap_or(0), &only)
            }
        }
        other => match build(other) {
            Ok(Some(mut cfg)) => {
                if let Some(seed) = cli.seed {
                    cfg.seed = seed;
                }
                if cli.out.is_some() || cfg.output_dir.is_none() {
                    cfg.output_dir = Some(config::resolve_output_dir(cli.out));
                }
                run::run_scenario(&cfg)
            }
            Ok(None) => unreachable!("handled above"),
            Err(e) => {
                eprintln!("error: {e:#}");
                EXIT_ERROR
            }
        },
    };
    ExitCode::from(code as u8)
}
