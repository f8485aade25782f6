//! Certification of majorization-ordered chains along a trajectory.
//!
//! Four checks, each usable on its own:
//!
//! * [`verify_chain`]: `p_{t₂} ≺ p_{t₁}` for adjacent snapshots plus sampled
//!   long-range pairs (strict and weak order side by side);
//! * [`verify_msl`]: `λ_φ(t)` non-increasing for every battery member, and the
//!   entropy `S = −λ_{x ln x}` non-decreasing;
//! * [`verify_sandwich`]: `p_∞ ≺ p_t ≺ p_0` for every snapshot, with the
//!   stationary residual `λ′_φ(p_∞)` for each differentiable member;
//! * [`verify_lemma1_equivalence`]: the cumulative-sum verdict and the
//!   battery verdict agree.
//!
//! [`verify_trajectory`] runs all of them and assembles a [`ChainReport`].

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::convex::{self, lambda, Battery, ConvexFn};
use crate::density::Density;
use crate::error::{Error, Result};
use crate::fpe::lambda_prime_rhs;
use crate::majorization::{majorization_failure, weak_majorization_failure, Failure, DEFAULT_TOL};
use crate::quantum::lambda_prime_from_density;
use crate::trajectory::{Source, Trajectory};

pub const DEFAULT_MSL_TOL: f64 = 1e-8;
pub const DEFAULT_LONG_RANGE_PAIRS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainOptions {
    /// Tolerance on cumulative sums.
    pub tol: f64,
    /// Absolute slack on `Δλ_φ`.
    pub msl_tol: f64,
    pub long_range_pairs: usize,
    pub full_pairwise: bool,
    pub seed: u64,
}

impl Default for ChainOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            msl_tol: DEFAULT_MSL_TOL,
            long_range_pairs: DEFAULT_LONG_RANGE_PAIRS,
            full_pairwise: false,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Check {
    Chain,
    WeakChain,
    Msl,
    Sl,
    /// `p_∞ ≺ p_t`
    SandwichLower,
    /// `p_t ≺ p_0`
    SandwichUpper,
    WeakSandwichLower,
    WeakSandwichUpper,
    Stationary,
    /// chain ⇒ MSL ⇒ SL consistency
    Implication,
}

impl Check {
    pub fn as_str(&self) -> &'static str {
        match self {
            Check::Chain => "chain",
            Check::WeakChain => "weak_chain",
            Check::Msl => "msl",
            Check::Sl => "sl",
            Check::SandwichLower => "sandwich_lower",
            Check::SandwichUpper => "sandwich_upper",
            Check::WeakSandwichLower => "weak_sandwich_lower",
            Check::WeakSandwichUpper => "weak_sandwich_upper",
            Check::Stationary => "stationary",
            Check::Implication => "implication",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What pins down a violation.
#[derive(Debug, Clone, PartialEq)]
pub enum WitnessRef {
    Phi(String),
    /// Number of largest cells whose sum breaks the order.
    Cumulative(usize),
    Mass,
}

impl fmt::Display for WitnessRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WitnessRef::Phi(id) => f.write_str(id),
            WitnessRef::Cumulative(k) => write!(f, "top{k}"),
            WitnessRef::Mass => f.write_str("mass"),
        }
    }
}

impl From<Failure> for (WitnessRef, f64) {
    fn from(fail: Failure) -> Self {
        match fail {
            Failure::Mass { lhs, rhs } => (WitnessRef::Mass, (lhs - rhs).abs()),
            Failure::Cumulative { k, excess } => (WitnessRef::Cumulative(k), excess),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub check: Check,
    pub t1: f64,
    pub t2: f64,
    pub witness: WitnessRef,
    pub magnitude: f64,
}

/// One line of `report.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub check: Check,
    pub t1: f64,
    pub t2: f64,
    /// Test function id, cumulative witness, or empty.
    pub phi_id: String,
    pub value: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainCheck {
    pub chain_holds: bool,
    pub weak_chain_holds: bool,
    /// Snapshot index pairs `(earlier, later)` that were compared.
    pub pairs: Vec<(usize, usize)>,
    pub violations: Vec<Violation>,
    pub rows: Vec<ReportRow>,
}

/// `λ_φ(t_k)` for every snapshot and battery member.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaTable {
    pub times: Vec<f64>,
    pub ids: Vec<String>,
    /// `values[k][m]` for snapshot `k`, member `m`.
    pub values: Vec<Vec<f64>>,
}

impl LambdaTable {
    pub fn build(traj: &Trajectory, battery: &Battery) -> Self {
        Self::build_with(traj, battery.members())
    }

    fn build_with(traj: &Trajectory, members: &[std::sync::Arc<dyn ConvexFn>]) -> Self {
        Self {
            times: traj.times(),
            ids: members.iter().map(|m| m.id().to_string()).collect(),
            values: traj
                .snapshots()
                .iter()
                .map(|s| members.iter().map(|m| lambda(&s.density, m.as_ref())).collect())
                .collect(),
        }
    }

    pub fn column(&self, id: &str) -> Option<Vec<f64>> {
        let m = self.ids.iter().position(|i| i == id)?;
        Some(self.values.iter().map(|row| row[m]).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MslCheck {
    pub msl_holds: bool,
    pub sl_holds: bool,
    /// Entropy `S(t_k) = −λ_{x ln x}(t_k)`.
    pub entropy: Vec<f64>,
    pub lambdas: LambdaTable,
    pub violations: Vec<Violation>,
    pub rows: Vec<ReportRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichCheck {
    pub holds: bool,
    pub weak_holds: bool,
    /// `p_∞` defaulted to the last snapshot.
    pub asymptotic_surrogate: bool,
    /// `λ′_φ(p_∞)` per differentiable member.
    pub stationary_residuals: Vec<(String, f64)>,
    pub violations: Vec<Violation>,
    pub rows: Vec<ReportRow>,
}

impl SandwichCheck {
    pub fn max_residual(&self) -> f64 {
        self.stationary_residuals
            .iter()
            .map(|(_, r)| r.abs())
            .fold(0.0, f64::max)
    }
}

fn need_snapshots(traj: &Trajectory, n: usize) -> Result<()> {
    if traj.len() < n {
        Err(Error::InvalidTrajectory(format!(
            "need at least {n} snapshots, got {}",
            traj.len()
        )))
    } else {
        Ok(())
    }
}

fn pairs_to_check(n: usize, opts: &ChainOptions) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|k| (k, k + 1)).collect();
    let mut far: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 2..n).map(move |j| (i, j)))
        .collect();
    if !opts.full_pairwise && far.len() > opts.long_range_pairs {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        far.shuffle(&mut rng);
        far.truncate(opts.long_range_pairs);
        far.sort_unstable();
    }
    pairs.extend(far);
    pairs
}

fn failure_row(check: Check, t1: f64, t2: f64, fail: Option<Failure>) -> (ReportRow, Option<Violation>) {
    match fail {
        None => (
            ReportRow {
                check,
                t1,
                t2,
                phi_id: String::new(),
                value: 0.0,
                pass: true,
            },
            None,
        ),
        Some(f) => {
            let (witness, magnitude) = f.into();
            (
                ReportRow {
                    check,
                    t1,
                    t2,
                    phi_id: witness.to_string(),
                    value: magnitude,
                    pass: false,
                },
                Some(Violation {
                    check,
                    t1,
                    t2,
                    witness,
                    magnitude,
                }),
            )
        }
    }
}

/// Checks `p_{t₂} ≺ p_{t₁}` (and the weak order) on adjacent pairs plus
/// `long_range_pairs` sampled non-adjacent pairs, or all pairs with
/// `full_pairwise`.
pub fn verify_chain(traj: &Trajectory, opts: &ChainOptions) -> Result<ChainCheck> {
    need_snapshots(traj, 2)?;
    let snaps = traj.snapshots();
    let pairs = pairs_to_check(snaps.len(), opts);
    let mut rows = Vec::with_capacity(2 * pairs.len());
    let mut violations = Vec::new();
    let (mut chain, mut weak) = (true, true);
    for &(i, j) in &pairs {
        let (early, late) = (&snaps[i], &snaps[j]);
        for (check, fail) in [
            (Check::Chain, majorization_failure(&late.density, &early.density, opts.tol)?),
            (Check::WeakChain, weak_majorization_failure(&late.density, &early.density, opts.tol)?),
        ] {
            match check {
                Check::Chain => chain &= fail.is_none(),
                _ => weak &= fail.is_none(),
            }
            let (row, violation) = failure_row(check, early.t, late.t, fail);
            rows.push(row);
            violations.extend(violation);
        }
    }
    Ok(ChainCheck {
        chain_holds: chain,
        weak_chain_holds: weak,
        pairs,
        violations,
        rows,
    })
}

/// Checks `Δλ_φ ≤ tol` between adjacent snapshots for every battery member,
/// and the entropy column for the second law.
pub fn verify_msl(traj: &Trajectory, battery: &Battery, tol: f64) -> Result<MslCheck> {
    need_snapshots(traj, 2)?;
    let lambdas = LambdaTable::build(traj, battery);
    let entropy: Vec<f64> = match lambdas.column("xlogx") {
        Some(col) => col,
        None => {
            let xlogx = convex::lookup("xlogx")?;
            traj.snapshots().iter().map(|s| lambda(&s.density, xlogx.as_ref())).collect()
        }
    }
    .into_iter()
    .map(|l| -l)
    .collect();
    let times = &lambdas.times;
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    let mut msl = true;
    for k in 0..times.len() - 1 {
        for (m, id) in lambdas.ids.iter().enumerate() {
            let delta = lambdas.values[k + 1][m] - lambdas.values[k][m];
            let pass = delta <= tol;
            msl &= pass;
            rows.push(ReportRow {
                check: Check::Msl,
                t1: times[k],
                t2: times[k + 1],
                phi_id: id.clone(),
                value: delta,
                pass,
            });
            if !pass {
                violations.push(Violation {
                    check: Check::Msl,
                    t1: times[k],
                    t2: times[k + 1],
                    witness: WitnessRef::Phi(id.clone()),
                    magnitude: delta,
                });
            }
        }
    }
    let mut sl = true;
    for k in 0..times.len() - 1 {
        let gain = entropy[k + 1] - entropy[k];
        let pass = gain >= -tol;
        sl &= pass;
        rows.push(ReportRow {
            check: Check::Sl,
            t1: times[k],
            t2: times[k + 1],
            phi_id: "xlogx".into(),
            value: gain,
            pass,
        });
        if !pass {
            violations.push(Violation {
                check: Check::Sl,
                t1: times[k],
                t2: times[k + 1],
                witness: WitnessRef::Phi("xlogx".into()),
                magnitude: -gain,
            });
        }
    }
    Ok(MslCheck {
        msl_holds: msl,
        sl_holds: sl,
        entropy,
        lambdas,
        violations,
        rows,
    })
}

/// `λ′_φ` at `p` using the rate formula that matches the trajectory source.
/// File and mixing sources fall back to the backward difference between the
/// last two snapshots.
pub fn stationary_residual(traj: &Trajectory, p: &Density, phi: &dyn ConvexFn) -> Result<f64> {
    match traj.source() {
        Source::Fpe(model) if model.is_force_free() => lambda_prime_rhs(p, model.as_ref(), phi),
        Source::Quantum { gamma, hbar } => lambda_prime_from_density(p, *gamma, *hbar, phi),
        _ => {
            if traj.len() < 2 {
                return Ok(0.0);
            }
            let snaps = traj.snapshots();
            let (a, b) = (&snaps[snaps.len() - 2], &snaps[snaps.len() - 1]);
            Ok((lambda(&b.density, phi) - lambda(&a.density, phi)) / (b.t - a.t))
        }
    }
}

/// Checks `p_∞ ≺ p_t ≺ p_0` for every snapshot. `p_inf` defaults to the last
/// snapshot, in which case the result is flagged as an asymptotic surrogate.
pub fn verify_sandwich(
    traj: &Trajectory,
    p_inf: Option<&Density>,
    battery: &Battery,
    opts: &ChainOptions,
) -> Result<SandwichCheck> {
    let surrogate = p_inf.is_none();
    let p_inf = p_inf.unwrap_or(&traj.last().density);
    traj.grid().check_same(&p_inf.grid())?;
    let p0 = &traj.first();
    let t_inf = f64::INFINITY;
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    let (mut strict, mut weak) = (true, true);
    for s in traj.snapshots() {
        let checks = [
            (Check::SandwichLower, s.t, t_inf, majorization_failure(p_inf, &s.density, opts.tol)?),
            (Check::SandwichUpper, p0.t, s.t, majorization_failure(&s.density, &p0.density, opts.tol)?),
            (Check::WeakSandwichLower, s.t, t_inf, weak_majorization_failure(p_inf, &s.density, opts.tol)?),
            (Check::WeakSandwichUpper, p0.t, s.t, weak_majorization_failure(&s.density, &p0.density, opts.tol)?),
        ];
        for (check, t1, t2, fail) in checks {
            match check {
                Check::SandwichLower | Check::SandwichUpper => strict &= fail.is_none(),
                _ => weak &= fail.is_none(),
            }
            let (row, violation) = failure_row(check, t1, t2, fail);
            rows.push(row);
            violations.extend(violation);
        }
    }
    let mut residuals = Vec::new();
    for phi in battery.differentiable() {
        let r = stationary_residual(traj, p_inf, phi.as_ref())?;
        rows.push(ReportRow {
            check: Check::Stationary,
            t1: traj.last().t,
            t2: t_inf,
            phi_id: phi.id().to_string(),
            value: r,
            pass: r.abs() <= opts.msl_tol,
        });
        residuals.push((phi.id().to_string(), r));
    }
    Ok(SandwichCheck {
        holds: strict,
        weak_holds: weak,
        asymptotic_surrogate: surrogate,
        stationary_residuals: residuals,
        violations,
        rows,
    })
}

/// Why the chain verdict and the battery verdict disagree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Disagreement {
    /// The chain fails but no battery member detects it: the finite battery
    /// lacks a separating function.
    BatteryGap,
    /// The chain holds but a battery member increases beyond tolerance:
    /// tolerance mismatch between the two checks.
    ToleranceMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lemma1Check {
    pub chain_holds: bool,
    pub msl_holds: bool,
    pub disagreement: Option<Disagreement>,
}

impl Lemma1Check {
    pub fn agrees(&self) -> bool {
        self.disagreement.is_none()
    }
}

/// Compares the ordered-chain verdict with the monotone-λ verdict over the
/// battery.
pub fn verify_lemma1_equivalence(traj: &Trajectory, battery: &Battery, opts: &ChainOptions) -> Result<Lemma1Check> {
    need_snapshots(traj, 3)?;
    let chain_holds = verify_chain(traj, opts)?.chain_holds;
    let msl_holds = verify_msl(traj, battery, opts.msl_tol)?.msl_holds;
    let disagreement = match (chain_holds, msl_holds) {
        (false, true) => Some(Disagreement::BatteryGap),
        (true, false) => Some(Disagreement::ToleranceMismatch),
        _ => None,
    };
    Ok(Lemma1Check {
        chain_holds,
        msl_holds,
        disagreement,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainReport {
    pub source: &'static str,
    pub chain_holds: bool,
    pub weak_chain_holds: bool,
    pub msl_holds: bool,
    pub sl_holds: bool,
    /// chain ⇒ MSL over the battery, and MSL with x ln x ⇒ SL.
    pub implications_hold: bool,
    pub lemma1: Option<Disagreement>,
    pub violations: Vec<Violation>,
    pub sandwich: Option<SandwichCheck>,
    pub stationary_residuals: Vec<(String, f64)>,
    pub lambdas: Option<LambdaTable>,
    pub rows: Vec<ReportRow>,
}

impl ChainReport {
    /// Overall verdict. Strict mode requires the strict chain, MSL, SL and
    /// the strict sandwich; weak mode the weak chain, MSL and the weak
    /// sandwich. Stationary residuals are reported, not gated.
    pub fn passes(&self, weak: bool) -> bool {
        let sandwich = self
            .sandwich
            .as_ref()
            .map(|s| if weak { s.weak_holds } else { s.holds })
            .unwrap_or(true);
        if weak {
            self.weak_chain_holds && self.msl_holds && sandwich
        } else {
            self.chain_holds && self.msl_holds && self.sl_holds && sandwich
        }
    }
}

/// Runs every check. A single-snapshot trajectory passes trivially.
pub fn verify_trajectory(
    traj: &Trajectory,
    battery: &Battery,
    p_inf: Option<&Density>,
    opts: &ChainOptions,
) -> Result<ChainReport> {
    let sandwich = verify_sandwich(traj, p_inf, battery, opts)?;
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    let (chain_holds, weak_chain_holds, msl_holds, sl_holds, lambdas) = if traj.len() >= 2 {
        let chain = verify_chain(traj, opts)?;
        let msl = verify_msl(traj, battery, opts.msl_tol)?;
        rows.extend(chain.rows);
        rows.extend(msl.rows);
        violations.extend(chain.violations);
        violations.extend(msl.violations);
        (chain.chain_holds, chain.weak_chain_holds, msl.msl_holds, msl.sl_holds, Some(msl.lambdas))
    } else {
        (true, true, true, true, None)
    };
    let has_xlogx = battery.get("xlogx").is_some();
    let chain_to_msl = !chain_holds || msl_holds;
    let msl_to_sl = !(msl_holds && has_xlogx) || sl_holds;
    let t_end = traj.last().t;
    let t0 = traj.first().t;
    rows.push(ReportRow {
        check: Check::Implication,
        t1: t0,
        t2: t_end,
        phi_id: "chain=>msl".into(),
        value: 0.0,
        pass: chain_to_msl,
    });
    rows.push(ReportRow {
        check: Check::Implication,
        t1: t0,
        t2: t_end,
        phi_id: "msl=>sl".into(),
        value: 0.0,
        pass: msl_to_sl,
    });
    let lemma1 = match (chain_holds, msl_holds) {
        (false, true) => Some(Disagreement::BatteryGap),
        (true, false) => Some(Disagreement::ToleranceMismatch),
        _ => None,
    };
    rows.extend(sandwich.rows.iter().cloned());
    violations.extend(sandwich.violations.iter().cloned());
    Ok(ChainReport {
        source: traj.source().tag(),
        chain_holds,
        weak_chain_holds,
        msl_holds,
        sl_holds,
        implications_hold: chain_to_msl && msl_to_sl,
        lemma1,
        violations,
        stationary_residuals: sandwich.stationary_residuals.clone(),
        sandwich: Some(sandwich),
        lambdas,
        rows,
    })
}
