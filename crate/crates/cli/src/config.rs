//! TOML scenario files.
//!
//! ```toml
//! engine = "fpe"            # fpe | quantum | mixing | verify
//! output_dir = "out/heat"   # optional, falls back to $MAJORIZE_OUT
//! seed = 0
//! battery = ["xlogx", "x2", "hinge:0.5"]
//!
//! [fpe]
//! model = "linear"
//! d = 1.0
//! grid = 512
//! t_end = 0.2
//! snapshots = [0.0, 0.01, 0.05, 0.2]
//! init = "builtin:cosine"
//! ```
//!
//! Only the block named by `engine` may be present. Unknown keys are
//! rejected.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use majorize::convex::{Battery, STANDARD_IDS};
use serde::Deserialize;

pub const OUT_ENV: &str = "MAJORIZE_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Fpe,
    Quantum,
    Mixing,
    Verify,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub engine: Engine,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub battery: Option<Vec<String>>,
    #[serde(default)]
    pub fpe: Option<FpeBlock>,
    #[serde(default)]
    pub quantum: Option<QuantumBlock>,
    #[serde(default)]
    pub mixing: Option<MixingBlock>,
    #[serde(default)]
    pub verify: Option<VerifyBlock>,
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

fn default_grid() -> i64 {
    256
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FpeBlock {
    pub model: String,
    #[serde(default = "one")]
    pub d: f64,
    #[serde(default = "two")]
    pub nu: f64,
    #[serde(default = "default_grid")]
    pub grid: i64,
    pub t_end: f64,
    pub snapshots: Vec<f64>,
    /// `builtin:<name>` or a density CSV path.
    pub init: String,
    /// Fixed step; 0 or absent picks one from the stability bound.
    #[serde(default)]
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumBlock {
    pub mode: String,
    #[serde(default = "one")]
    pub epsilon: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "default_grid")]
    pub grid: i64,
    pub snapshots: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expect {
    Mixing,
    NotMixing,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixingBlock {
    pub map: String,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_mixing_tol")]
    pub tol: f64,
    #[serde(default = "default_expect")]
    pub expect: Expect,
    #[serde(default = "default_density_grid")]
    pub density_grid: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_n_max() -> usize {
    60
}
fn default_points() -> usize {
    1_000_000
}
fn default_mixing_tol() -> f64 {
    0.02
}
fn default_expect() -> Expect {
    Expect::Mixing
}
fn default_density_grid() -> usize {
    256
}
fn default_samples() -> usize {
    1_000_000
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyBlock {
    /// Trajectory directory or glob of `t_<time>.csv` files.
    pub input: String,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_msl_tol")]
    pub msl_tol: f64,
    #[serde(default)]
    pub full_pairwise: bool,
    #[serde(default)]
    pub weak: bool,
    /// Verify the time-reversed trajectory.
    #[serde(default)]
    pub reverse: bool,
    /// Density CSV used as the infimum instead of the last snapshot.
    #[serde(default)]
    pub p_inf: Option<PathBuf>,
}

fn default_tol() -> f64 {
    majorize::majorization::DEFAULT_TOL
}
fn default_msl_tol() -> f64 {
    majorize::chain::DEFAULT_MSL_TOL
}

fn positive_grid(n: i64) -> Result<usize> {
    if n < 2 {
        bail!("grid must have at least 2 cells, got {n}");
    }
    Ok(n as usize)
}

impl FpeBlock {
    pub fn grid(&self) -> Result<usize> {
        positive_grid(self.grid)
    }
}

impl QuantumBlock {
    pub fn grid(&self) -> Result<usize> {
        positive_grid(self.grid)
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).context("parsing scenario")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        let present = [
            (Engine::Fpe, self.fpe.is_some()),
            (Engine::Quantum, self.quantum.is_some()),
            (Engine::Mixing, self.mixing.is_some()),
            (Engine::Verify, self.verify.is_some()),
        ];
        for (engine, has) in present {
            if engine == self.engine && !has {
                bail!("engine {:?} needs a [{}] block", self.engine, block_name(engine));
            }
            if engine != self.engine && has {
                bail!("[{}] block given but engine is {:?}", block_name(engine), self.engine);
            }
        }
        self.battery()?;
        if let Some(f) = &self.fpe {
            f.grid()?;
            if !(f.t_end >= 0.0) {
                bail!("t_end must be >= 0");
            }
        }
        if let Some(q) = &self.quantum {
            q.grid()?;
            if q.snapshots.is_empty() {
                bail!("at least one snapshot time is required");
            }
        }
        if let Some(m) = &self.mixing {
            if m.n_max == 0 || m.points == 0 {
                bail!("n_max and points must be positive");
            }
            if !(m.tol > 0.0) {
                bail!("tol must be > 0");
            }
        }
        if let Some(v) = &self.verify {
            if !(v.tol >= 0.0 && v.msl_tol >= 0.0) {
                bail!("tolerances must be >= 0");
            }
        }
        Ok(())
    }

    /// The configured battery, or the engine default: the increasing battery
    /// for decaying quantum runs, the standard battery otherwise.
    pub fn battery(&self) -> Result<Battery> {
        match &self.battery {
            Some(ids) => Ok(Battery::from_ids(ids.as_slice())?),
            None => match &self.quantum {
                Some(q) if q.gamma < 0.0 => Ok(Battery::icx()),
                _ => Ok(Battery::from_ids(STANDARD_IDS)?),
            },
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        resolve_output_dir(self.output_dir.clone())
    }
}

fn block_name(e: Engine) -> &'static str {
    match e {
        Engine::Fpe => "fpe",
        Engine::Quantum => "quantum",
        Engine::Mixing => "mixing",
        Engine::Verify => "verify",
    }
}

pub fn resolve_output_dir(explicit: Option<PathBuf>) -> PathBuf {
    explicit
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAT: &str = r#"
engine = "fpe"
output_dir = "x"
[fpe]
model = "linear"
grid = 64
t_end = 0.1
snapshots = [0.0, 0.1]
init = "builtin:cosine"
"#;

    #[test]
    fn parses_and_defaults() {
        let cfg = ScenarioConfig::from_toml(HEAT).unwrap();
        assert_eq!(cfg.engine, Engine::Fpe);
        let f = cfg.fpe.unwrap();
        assert_eq!((f.d, f.nu, f.dt), (1.0, 2.0, 0.0));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(ScenarioConfig::from_toml(&format!("{HEAT}\nbogus = 1")).is_err());
        assert!(ScenarioConfig::from_toml(&HEAT.replace("grid = 64", "grid = -4")).is_err());
        assert!(ScenarioConfig::from_toml(&HEAT.replace("engine = \"fpe\"", "engine = \"mixing\"")).is_err());
        assert!(ScenarioConfig::from_toml(&format!("battery = [\"nope\"]\n{HEAT}")).is_err());
    }
}
