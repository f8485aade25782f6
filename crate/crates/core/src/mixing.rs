//! Correlation decay of interval maps.
//!
//! One iterate of a map stands in for one unit of time. Correlations
//! `∫ f(Tⁿx) g(x) dx` are computed by deterministic midpoint quadrature over
//! initial conditions. Reductions run in parallel over fixed-size chunks and
//! the chunk partials are added in index order, so results do not depend on
//! thread scheduling.

use std::fmt;
use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::density::{Density, Grid};
use crate::error::{Error, Result};
use crate::registry::{parse_arg, reject_arg, Registry};

/// Map outputs are clamped into `[EDGE, 1 − EDGE]`.
pub const EDGE: f64 = 1e-15;
const CHUNK: usize = 4096;

pub trait IntervalMap: Send + Sync {
    fn name(&self) -> String;
    fn apply(&self, x: f64) -> f64;

    /// Number of iterates after which a floating-point orbit stops being
    /// representative. Bit-shifting maps (doubling, tent) lose one mantissa
    /// bit per step and collapse onto 0 after about 53 iterates.
    fn float_horizon(&self) -> Option<usize> {
        None
    }
}

impl fmt::Debug for dyn IntervalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntervalMap({})", self.name())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Logistic;

impl IntervalMap for Logistic {
    fn name(&self) -> String {
        "logistic".into()
    }
    fn apply(&self, x: f64) -> f64 {
        4.0 * x * (1.0 - x)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Doubling;

impl IntervalMap for Doubling {
    fn name(&self) -> String {
        "doubling".into()
    }
    fn apply(&self, x: f64) -> f64 {
        (2.0 * x).fract()
    }
    fn float_horizon(&self) -> Option<usize> {
        Some(40)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Tent;

impl IntervalMap for Tent {
    fn name(&self) -> String {
        "tent".into()
    }
    fn apply(&self, x: f64) -> f64 {
        if x < 0.5 {
            2.0 * x
        } else {
            2.0 * (1.0 - x)
        }
    }
    fn float_horizon(&self) -> Option<usize> {
        Some(40)
    }
}

/// x ↦ x + α mod 1. Measure preserving, never mixing.
#[derive(Debug, Clone, Copy)]
pub struct Rotation {
    pub alpha: f64,
}

impl IntervalMap for Rotation {
    fn name(&self) -> String {
        format!("rotation:{}", self.alpha)
    }
    fn apply(&self, x: f64) -> f64 {
        (x + self.alpha).rem_euclid(1.0)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Identity;

impl IntervalMap for Identity {
    fn name(&self) -> String {
        "identity".into()
    }
    fn apply(&self, x: f64) -> f64 {
        x
    }
}

/// (√5 − 1)/2
pub fn golden_alpha() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

pub fn registry() -> &'static Registry<dyn IntervalMap> {
    static REGISTRY: OnceLock<Registry<dyn IntervalMap>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        Registry::<dyn IntervalMap>::new("map")
            .register("logistic", "4x(1−x)", |arg, _| {
                reject_arg("logistic", arg)?;
                Ok(Arc::new(Logistic))
            })
            .register("doubling", "2x mod 1", |arg, _| {
                reject_arg("doubling", arg)?;
                Ok(Arc::new(Doubling))
            })
            .register("tent", "1 − |2x − 1|", |arg, _| {
                reject_arg("tent", arg)?;
                Ok(Arc::new(Tent))
            })
            .register("rotation", "rotation[:<alpha>], x + α mod 1 (golden ratio by default)", |arg, _| {
                let alpha = match arg {
                    Some("golden") | None => golden_alpha(),
                    Some(_) => parse_arg("rotation", arg)?,
                };
                Ok(Arc::new(Rotation { alpha }))
            })
            .register("identity", "x ↦ x", |arg, _| {
                reject_arg("identity", arg)?;
                Ok(Arc::new(Identity))
            })
    })
}

#[derive(Clone)]
pub struct MapSystem {
    pub map: Arc<dyn IntervalMap>,
    pub invariant_density_estimate: Option<Density>,
    pub seed: u64,
}

impl fmt::Debug for MapSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MapSystem")
            .field("map", &self.map.name())
            .field("has_invariant_density", &self.invariant_density_estimate.is_some())
            .field("seed", &self.seed)
            .finish()
    }
}

impl MapSystem {
    pub fn new(map: Arc<dyn IntervalMap>, seed: u64) -> Self {
        Self {
            map,
            invariant_density_estimate: None,
            seed,
        }
    }

    pub fn from_spec(spec: &str, seed: u64) -> Result<Self> {
        Ok(Self::new(registry().resolve(spec, &())?, seed))
    }

    pub fn name(&self) -> String {
        self.map.name()
    }

    pub fn step(&self, x: f64) -> f64 {
        self.map.apply(x).clamp(EDGE, 1.0 - EDGE)
    }

    pub fn iterate(&self, mut x: f64, n: usize) -> f64 {
        for _ in 0..n {
            x = self.step(x);
        }
        x
    }

    pub fn with_invariant_density(mut self, d: Density) -> Self {
        self.invariant_density_estimate = Some(d);
        self
    }
}

/// Bounded, possibly signed, piecewise-constant function on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    grid: Grid,
    values: Vec<f64>,
}

impl Observable {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return Err(Error::ValueCount {
                expected: grid.n_cells(),
                got: values.len(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidValue { index, value });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.centers().map(f).collect())
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.values[self.grid.cell_of(x)]
    }

    /// ∫ f dx
    pub fn mean(&self) -> f64 {
        self.grid.h() * self.values.iter().sum::<f64>()
    }

    /// ∫ f ρ dx for a density on any grid (exact for piecewise constants).
    pub fn integrate_against(&self, rho: &Density) -> f64 {
        let (nf, nr) = (self.grid.n_cells(), rho.grid().n_cells());
        let (mut i, mut j) = (0usize, 0usize);
        let mut left = 0.0;
        let mut total = 0.0;
        while i < nf && j < nr {
            let right_f = (i + 1) as f64 / nf as f64;
            let right_r = (j + 1) as f64 / nr as f64;
            let right = right_f.min(right_r);
            total += (right - left) * self.values[i] * rho.values()[j];
            left = right;
            if right_f <= right {
                i += 1;
            }
            if right_r <= right {
                j += 1;
            }
        }
        total
    }

    /// f − ∫ f dx
    pub fn centered(&self) -> Self {
        let m = self.mean();
        self.shifted(-m)
    }

    /// f − ∫ f ρ dx / ∫ ρ dx
    pub fn centered_against(&self, rho: &Density) -> Self {
        let m = self.integrate_against(rho) / rho.mass();
        self.shifted(-m)
    }

    fn shifted(&self, by: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v + by).collect(),
        }
    }
}

impl From<&Density> for Observable {
    fn from(d: &Density) -> Self {
        Self {
            grid: d.grid(),
            values: d.values().to_vec(),
        }
    }
}

/// Normalized histogram of orbit points after a transient. Maps with a
/// [`IntervalMap::float_horizon`] are sampled in orbit segments restarted
/// from fresh seeded points.
pub fn estimate_invariant_density(
    sys: &MapSystem,
    n_transient: usize,
    n_samples: usize,
    grid: Grid,
) -> Result<Density> {
    if n_samples < 10_000 {
        return Err(Error::InvalidParameter(format!("need at least 10^4 samples, got {n_samples}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sys.seed);
    let mut counts = vec![0u64; grid.n_cells()];
    let (segment, transient) = match sys.map.float_horizon() {
        Some(horizon) => (horizon, n_transient.min(horizon / 2)),
        None => (usize::MAX, n_transient),
    };
    let mut recorded = 0usize;
    while recorded < n_samples {
        let mut x: f64 = rng.gen_range(EDGE..1.0 - EDGE);
        x = sys.iterate(x, transient);
        let mut in_segment = transient;
        while recorded < n_samples && in_segment < segment {
            counts[grid.cell_of(x)] += 1;
            recorded += 1;
            x = sys.step(x);
            in_segment += 1;
        }
    }
    let visited = counts.iter().filter(|&&c| c > 0).count();
    if visited < 2 {
        return Err(Error::DegenerateOrbit {
            map: sys.name(),
            cells: visited,
        });
    }
    let scale = 1.0 / (n_samples as f64 * grid.h());
    Density::new(grid, counts.iter().map(|&c| c as f64 * scale).collect())
}

fn nodes(n_points: usize) -> Result<Vec<f64>> {
    if n_points == 0 {
        return Err(Error::InvalidParameter("need at least one quadrature node".into()));
    }
    let w = 1.0 / n_points as f64;
    Ok((0..n_points).map(|j| (j as f64 + 0.5) * w).collect())
}

/// Σ_j term(j) with fixed chunking and in-order accumulation of partials.
fn ordered_sum(len: usize, term: impl Fn(usize) -> f64 + Sync) -> f64 {
    let partials: Vec<f64> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| (c * CHUNK..((c + 1) * CHUNK).min(len)).map(&term).sum::<f64>())
        .collect();
    partials.iter().sum()
}

fn advance(sys: &MapSystem, positions: &mut [f64]) {
    positions.par_chunks_mut(CHUNK).for_each(|chunk| {
        for x in chunk {
            *x = sys.step(*x);
        }
    });
}

/// `∫ f(Tⁿx) g(x) dx` with `n_points` midpoint nodes.
pub fn correlation(
    sys: &MapSystem,
    f: &Observable,
    g: &Observable,
    n: usize,
    n_points: usize,
) -> Result<f64> {
    f.grid().check_same(&g.grid())?;
    let x0 = nodes(n_points)?;
    let mut x = x0.clone();
    for _ in 0..n {
        advance(sys, &mut x);
    }
    let w = 1.0 / n_points as f64;
    Ok(w * ordered_sum(n_points, |j| f.eval(x[j]) * g.eval(x0[j])))
}

/// Correlations of every pair for `n = 0..=n_max`, sharing one pass of
/// orbit iteration. Returns `[pair][n]`.
pub fn correlation_series(
    sys: &MapSystem,
    pairs: &[(&Observable, &Observable)],
    n_start: usize,
    n_max: usize,
    n_points: usize,
) -> Result<Vec<Vec<f64>>> {
    for (f, g) in pairs {
        f.grid().check_same(&g.grid())?;
    }
    let x0 = nodes(n_points)?;
    let mut x = x0.clone();
    for _ in 0..n_start {
        advance(sys, &mut x);
    }
    let w = 1.0 / n_points as f64;
    let mut out = vec![Vec::with_capacity(n_max.saturating_sub(n_start) + 1); pairs.len()];
    for n in n_start..=n_max {
        for (series, (f, g)) in out.iter_mut().zip(pairs) {
            series.push(w * ordered_sum(n_points, |j| f.eval(x[j]) * g.eval(x0[j])));
        }
        if n < n_max {
            advance(sys, &mut x);
        }
    }
    Ok(out)
}

/// `‖f∘Tⁿ‖₁` for `n = 0..=n_max`.
pub fn l1_norm_sequence(sys: &MapSystem, f: &Observable, n_max: usize, n_points: usize) -> Result<Vec<f64>> {
    if n_max < 1 {
        return Err(Error::InvalidParameter("n_max must be >= 1".into()));
    }
    let mut x = nodes(n_points)?;
    let w = 1.0 / n_points as f64;
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        out.push(w * ordered_sum(n_points, |j| f.eval(x[j]).abs()));
        if n < n_max {
            advance(sys, &mut x);
        }
    }
    Ok(out)
}

/// `μ(T⁻¹[a,b]) = ∫ 1{T(x) ∈ [a,b]} ρ(x) dx` by midpoint quadrature.
pub fn preimage_measure(sys: &MapSystem, rho: &Density, a: f64, b: f64, n_points: usize) -> Result<f64> {
    let x = nodes(n_points)?;
    let w = 1.0 / n_points as f64;
    let grid = rho.grid();
    Ok(w * ordered_sum(n_points, |j| {
        let y = sys.step(x[j]);
        if y >= a && y < b {
            rho.values()[grid.cell_of(x[j])]
        } else {
            0.0
        }
    }))
}

/// `∫_a^b ρ dx` for a piecewise-constant density.
pub fn interval_measure(rho: &Density, a: f64, b: f64) -> f64 {
    let grid = rho.grid();
    let h = grid.h();
    rho.values()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let (lo, hi) = (i as f64 * h, (i + 1) as f64 * h);
            let overlap = (hi.min(b) - lo.max(a)).max(0.0);
            overlap * v
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixingOptions {
    pub n_max: usize,
    pub n_points: usize,
    pub tol: f64,
    /// The band must hold from `n_settle ≤ settle_fraction · n_max` on.
    pub settle_fraction: f64,
    /// Invariant-density estimation, used when the system carries none.
    pub density_grid: usize,
    pub n_transient: usize,
    pub n_samples: usize,
}

impl Default for MixingOptions {
    fn default() -> Self {
        Self {
            n_max: 60,
            n_points: 1_000_000,
            tol: 0.02,
            settle_fraction: 0.5,
            density_grid: 256,
            n_transient: 1000,
            n_samples: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixingVerdict {
    MixingConsistent,
    NotMixingEvidence { violating_n: usize },
}

impl fmt::Display for MixingVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MixingVerdict::MixingConsistent => f.write_str("mixing-consistent"),
            MixingVerdict::NotMixingEvidence { violating_n } => {
                write!(f, "not-mixing-evidence (n = {violating_n})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairReport {
    pub pair_id: String,
    /// `(∫ f f_*) (∫ g)`
    pub limit: f64,
    pub correlations: Vec<f64>,
    /// Smallest n after which every correlation stays in the band.
    pub n_settle: Option<usize>,
    pub verdict: MixingVerdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixingReport {
    pub map: String,
    pub tol: f64,
    pub pairs: Vec<PairReport>,
}

impl MixingReport {
    pub fn all_consistent(&self) -> bool {
        self.pairs
            .iter()
            .all(|p| p.verdict == MixingVerdict::MixingConsistent)
    }
}

fn settle(correlations: &[f64], limit: f64, tol: f64) -> Option<usize> {
    let last_bad = correlations.iter().rposition(|c| (c - limit).abs() > tol);
    match last_bad {
        None => Some(0),
        Some(n) if n + 1 < correlations.len() => Some(n + 1),
        Some(_) => None,
    }
}

/// Checks every ordered pair `(f, g)` of observables against the mixing
/// limit `(∫ f f_*)(∫ g)`.
pub fn mixing_verdict(sys: &MapSystem, observables: &[Observable], opts: &MixingOptions) -> Result<MixingReport> {
    if observables.len() < 2 {
        return Err(Error::InvalidParameter("need at least two observables".into()));
    }
    let rho = match &sys.invariant_density_estimate {
        Some(d) => d.clone(),
        None => estimate_invariant_density(sys, opts.n_transient, opts.n_samples, Grid::new(opts.density_grid)?)?,
    };
    let mut pairs = Vec::new();
    let mut ids = Vec::new();
    for (i, f) in observables.iter().enumerate() {
        for (j, g) in observables.iter().enumerate() {
            pairs.push((f, g));
            ids.push(format!("f{i}*g{j}"));
        }
    }
    let series = correlation_series(sys, &pairs, 0, opts.n_max, opts.n_points)?;
    let max_settle = (opts.settle_fraction * opts.n_max as f64).floor() as usize;
    let reports = pairs
        .iter()
        .zip(ids)
        .zip(series)
        .map(|(((f, g), pair_id), correlations)| {
            let limit = f.integrate_against(&rho) / rho.mass() * g.mean();
            let n_settle = settle(&correlations, limit, opts.tol);
            let verdict = match n_settle {
                Some(n) if n <= max_settle => MixingVerdict::MixingConsistent,
                Some(n) => MixingVerdict::NotMixingEvidence { violating_n: n - 1 },
                None => MixingVerdict::NotMixingEvidence {
                    violating_n: correlations.len() - 1,
                },
            };
            PairReport {
                pair_id,
                limit,
                correlations,
                n_settle,
                verdict,
            }
        })
        .collect();
    Ok(MixingReport {
        map: sys.name(),
        tol: opts.tol,
        pairs: reports,
    })
}

/// Default observables: cos 2πx and x² centered against `rho`.
pub fn default_observables(grid: Grid, rho: &Density) -> Result<Vec<Observable>> {
    let cos = Observable::from_fn(grid, |x| (2.0 * std::f64::consts::PI * x).cos())?;
    let sq = Observable::from_fn(grid, |x| x * x)?.centered_against(rho);
    Ok(vec![cos, sq])
}
