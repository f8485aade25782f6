//! Generalized Fokker-Planck evolution on (0,1) with no-flux walls:
//!
//! ∂p/∂t = −∂ₓ(F(x) Ψ[p]) + ∂ₓ(Ω[p] ∂ₓp)
//!
//! Space is discretized with a conservative finite-volume scheme and time with
//! forward Euler under a hard stability gate. With `F ≡ 0` one step is
//! `p ← A p` for a symmetric, row-stochastic, nonnegative `A`, so every step
//! moves the density down the majorization order.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::convex::ConvexFn;
use crate::density::{Density, Grid};
use crate::error::{Error, Result};
use crate::majorization::NORM_TOL;
use crate::registry::{parse_arg, reject_arg, Registry};
use crate::trajectory::{Snapshot, Source, Trajectory};

/// Values in `[-CLAMP_TOL, 0)` after a step are rounded up to zero.
pub const CLAMP_TOL: f64 = 1e-13;

/// External force `F(x) = −dV/dx`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Force {
    #[default]
    Zero,
    Constant(f64),
    /// `F(x) = −k (x − center)`
    Harmonic { k: f64, center: f64 },
}

impl Force {
    pub fn at(&self, x: f64) -> f64 {
        match *self {
            Force::Zero => 0.0,
            Force::Constant(c) => c,
            Force::Harmonic { k, center } => -k * (x - center),
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            Force::Zero => true,
            Force::Constant(c) => c == 0.0,
            Force::Harmonic { k, .. } => k == 0.0,
        }
    }

    /// Largest |F| over the interior faces of `grid`.
    fn max_abs_on_faces(&self, grid: Grid) -> f64 {
        (1..grid.n_cells())
            .map(|i| self.at(i as f64 * grid.h()).abs())
            .fold(0.0, f64::max)
    }
}

pub trait FpeModel: Send + Sync {
    fn name(&self) -> &str;
    fn force(&self) -> Force;
    /// Ψ as a function of the local density value.
    fn psi(&self, p: f64) -> f64;
    /// Ω as a function of the local density value.
    fn omega(&self, p: f64) -> f64;

    fn omega_max_estimate(&self, d: &Density) -> f64 {
        d.values().iter().map(|&v| self.omega(v)).fold(0.0, f64::max)
    }

    fn is_force_free(&self) -> bool {
        self.force().is_zero()
    }
}

impl fmt::Debug for dyn FpeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FpeModel({})", self.name())
    }
}

/// Ω ≡ D, Ψ[p] = p.
#[derive(Debug, Clone)]
pub struct LinearFpe {
    pub d: f64,
    pub force: Force,
}

impl FpeModel for LinearFpe {
    fn name(&self) -> &str {
        "linear"
    }
    fn force(&self) -> Force {
        self.force
    }
    fn psi(&self, p: f64) -> f64 {
        p
    }
    fn omega(&self, _p: f64) -> f64 {
        self.d
    }
}

/// Ω[p] = D ν p^(ν−1), Ψ[p] = p.
#[derive(Debug, Clone)]
pub struct PorousFpe {
    pub d: f64,
    pub nu: f64,
    pub force: Force,
}

impl FpeModel for PorousFpe {
    fn name(&self) -> &str {
        "porous"
    }
    fn force(&self) -> Force {
        self.force
    }
    fn psi(&self, p: f64) -> f64 {
        p
    }
    fn omega(&self, p: f64) -> f64 {
        let p = p.max(0.0);
        if self.nu == 1.0 {
            self.d
        } else if self.nu == 2.0 {
            2.0 * self.d * p
        } else {
            self.d * self.nu * p.powf(self.nu - 1.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpeParams {
    pub d: f64,
    pub nu: f64,
    pub force: Force,
}

impl Default for FpeParams {
    fn default() -> Self {
        Self {
            d: 1.0,
            nu: 2.0,
            force: Force::Zero,
        }
    }
}

fn check_d(d: f64) -> Result<()> {
    if d > 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("diffusion constant must be > 0, got {d}")))
    }
}

pub fn registry() -> &'static Registry<dyn FpeModel, FpeParams> {
    static REGISTRY: OnceLock<Registry<dyn FpeModel, FpeParams>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        Registry::<dyn FpeModel, FpeParams>::new("fpe model")
            .register("linear", "Ω = D, Ψ = p (heat equation when F = 0)", |arg, p| {
                reject_arg("linear", arg)?;
                check_d(p.d)?;
                Ok(Arc::new(LinearFpe { d: p.d, force: p.force }))
            })
            .register("porous", "Ω = Dνp^(ν−1), Ψ = p", |arg, p| {
                reject_arg("porous", arg)?;
                check_d(p.d)?;
                if !(p.nu >= 1.0 && p.nu.is_finite()) {
                    return Err(Error::InvalidParameter(format!("nu must be >= 1, got {}", p.nu)));
                }
                Ok(Arc::new(PorousFpe {
                    d: p.d,
                    nu: p.nu,
                    force: p.force,
                }))
            })
    })
}

pub fn lookup(name: &str, params: &FpeParams) -> Result<Arc<dyn FpeModel>> {
    registry().resolve(name, params)
}

/// Largest stable explicit step for the current state: the diffusive bound
/// `h²/(2 Ω_max)`, tightened by the upwind drift speed when `F ≠ 0`.
pub fn stability_bound(p: &Density, model: &dyn FpeModel) -> f64 {
    let grid = p.grid();
    bound_from(grid, model.omega_max_estimate(p), model.force().max_abs_on_faces(grid))
}

fn bound_from(grid: Grid, omega_max: f64, force_max: f64) -> f64 {
    let h = grid.h();
    let rate = 2.0 * omega_max / (h * h) + force_max / h;
    if rate > 0.0 {
        1.0 / rate
    } else {
        f64::INFINITY
    }
}

struct Stepper<'a> {
    model: &'a dyn FpeModel,
    grid: Grid,
    force: Force,
    face_force: Vec<f64>,
    force_max: f64,
    flux: Vec<f64>,
    omega: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(model: &'a dyn FpeModel, grid: Grid) -> Self {
        let n = grid.n_cells();
        let force = model.force();
        let face_force: Vec<f64> = (1..n).map(|i| force.at(i as f64 * grid.h())).collect();
        let force_max = face_force.iter().map(|f| f.abs()).fold(0.0, f64::max);
        Self {
            model,
            grid,
            force,
            face_force,
            force_max,
            flux: vec![0.0; n - 1],
            omega: vec![0.0; n],
        }
    }

    fn bound(&self, values: &[f64]) -> f64 {
        let omega_max = values.iter().map(|&v| self.model.omega(v)).fold(0.0, f64::max);
        bound_from(self.grid, omega_max, self.force_max)
    }

    /// One forward-Euler step in place. Checks the bound against the current
    /// state.
    fn step(&mut self, values: &mut [f64], dt: f64) -> Result<()> {
        let h = self.grid.h();
        let n = values.len();
        let mut omega_max: f64 = 0.0;
        for (o, &v) in self.omega.iter_mut().zip(values.iter()) {
            *o = self.model.omega(v);
            omega_max = omega_max.max(*o);
        }
        let bound = bound_from(self.grid, omega_max, self.force_max);
        if !(dt > 0.0) || dt > bound * (1.0 + 1e-12) {
            return Err(Error::StabilityViolation { dt, bound });
        }
        let drift = !self.force.is_zero();
        for i in 0..n - 1 {
            let omega_face = 0.5 * (self.omega[i] + self.omega[i + 1]);
            let mut j = -omega_face * (values[i + 1] - values[i]) / h;
            if drift {
                let f = self.face_force[i];
                let upwind = if f > 0.0 { values[i] } else { values[i + 1] };
                j += f * self.model.psi(upwind);
            }
            self.flux[i] = j;
        }
        let c = dt / h;
        for i in 0..n {
            let right = if i + 1 < n { self.flux[i] } else { 0.0 };
            let left = if i > 0 { self.flux[i - 1] } else { 0.0 };
            let v = values[i] - c * (right - left);
            values[i] = if v >= 0.0 {
                v
            } else if v >= -CLAMP_TOL {
                0.0
            } else {
                return Err(Error::NegativeDensity { index: i, value: v });
            };
        }
        Ok(())
    }
}

/// One explicit conservative finite-volume step.
pub fn fpe_step(p: &Density, model: &dyn FpeModel, dt: f64) -> Result<Density> {
    let mut values = p.values().to_vec();
    Stepper::new(model, p.grid()).step(&mut values, dt)?;
    Density::new(p.grid(), values)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FpeRunConfig {
    pub grid: Grid,
    /// Fixed step; `0` selects `safety × bound` automatically.
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    pub safety: f64,
}

impl FpeRunConfig {
    pub fn new(grid: Grid, t_end: f64, snapshot_times: Vec<f64>) -> Self {
        Self {
            grid,
            dt: 0.0,
            t_end,
            snapshot_times,
            safety: 0.9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return bad(format!("safety must be in (0,1], got {}", self.safety));
        }
        if !(self.dt >= 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be >= 0, got {}", self.dt));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be >= 0, got {}", self.t_end));
        }
        if self.snapshot_times.is_empty() {
            return bad("at least one snapshot time is required".into());
        }
        for w in self.snapshot_times.windows(2) {
            if w[1] <= w[0] {
                return bad(format!("snapshot times must increase: {} then {}", w[0], w[1]));
            }
        }
        let (lo, hi) = (self.snapshot_times[0], *self.snapshot_times.last().unwrap());
        if lo < 0.0 || hi > self.t_end {
            return bad(format!("snapshot times must lie in [0, {}]", self.t_end));
        }
        Ok(())
    }
}

/// Steps between refreshes of the automatic step size.
const DT_REFRESH: usize = 100;

/// Evolves `p0` and records a snapshot at each configured time. The last
/// step before a snapshot is shortened so snapshots land on their times.
pub fn fpe_evolve(p0: &Density, model: Arc<dyn FpeModel>, cfg: &FpeRunConfig) -> Result<Trajectory> {
    cfg.validate()?;
    cfg.grid.check_same(&p0.grid())?;
    if !p0.is_probability(NORM_TOL) {
        return Err(Error::InvalidParameter(format!(
            "initial density must have unit mass, got {}",
            p0.mass()
        )));
    }
    let grid = p0.grid();
    let mut stepper = Stepper::new(model.as_ref(), grid);
    let mut values = p0.values().to_vec();
    let mut t = 0.0;
    let mut auto_dt = cfg.safety * stepper.bound(&values);
    let mut steps = 0usize;
    let mut snapshots = Vec::with_capacity(cfg.snapshot_times.len());
    for &target in &cfg.snapshot_times {
        while t < target {
            if cfg.dt == 0.0 && steps % DT_REFRESH == 0 {
                auto_dt = cfg.safety * stepper.bound(&values);
            }
            let dt = if cfg.dt > 0.0 { cfg.dt } else { auto_dt };
            let remaining = target - t;
            let last = remaining <= dt;
            let step_dt = if last { remaining } else { dt };
            match stepper.step(&mut values, step_dt) {
                // the state is untouched when the gate trips
                Err(Error::StabilityViolation { bound, .. }) if cfg.dt == 0.0 => {
                    auto_dt = cfg.safety * bound;
                    continue;
                }
                r => r?,
            }
            t = if last { target } else { t + step_dt };
            steps += 1;
        }
        snapshots.push(Snapshot {
            t,
            density: Density::new(grid, values.clone())?,
        });
    }
    Trajectory::new(snapshots, Source::Fpe(model))
}

/// ∂p/∂x: centered differences inside, one-sided in the boundary cells.
pub fn gradient(p: &Density) -> Vec<f64> {
    let v = p.values();
    let n = v.len();
    let h = p.grid().h();
    (0..n)
        .map(|i| match i {
            0 => (v[1] - v[0]) / h,
            i if i == n - 1 => (v[n - 1] - v[n - 2]) / h,
            i => (v[i + 1] - v[i - 1]) / (2.0 * h),
        })
        .collect()
}

/// `λ′_φ = −∫ φ″(p) Ω[p] (∂p/∂x)² dx` for force-free models. Never positive.
pub fn lambda_prime_rhs(p: &Density, model: &dyn FpeModel, phi: &dyn ConvexFn) -> Result<f64> {
    if !phi.differentiable() {
        return Err(Error::NonDifferentiablePhi(phi.id().to_string()));
    }
    if !model.is_force_free() {
        return Err(Error::InvalidParameter(
            "the dissipation integral assumes a force-free model".into(),
        ));
    }
    let grad = gradient(p);
    let sum: f64 = p
        .values()
        .iter()
        .zip(&grad)
        .map(|(&v, &g)| {
            let omega = model.omega(v);
            if g == 0.0 || omega == 0.0 {
                0.0
            } else {
                phi.d2(v) * omega * g * g
            }
        })
        .sum();
    Ok(-p.grid().h() * sum)
}

fn profile(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Arc<Density>> {
    Ok(Arc::new(Density::from_fn(grid, f)?.normalized()?))
}

/// Built-in initial conditions, resolved as `builtin:<name>` on the CLI.
pub fn initial_conditions() -> &'static Registry<Density, Grid> {
    static REGISTRY: OnceLock<Registry<Density, Grid>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        Registry::<Density, Grid>::new("initial condition")
            .register("cosine", "1 + cos(πx)", |arg, grid| {
                reject_arg("cosine", arg)?;
                profile(*grid, |x| 1.0 + (std::f64::consts::PI * x).cos())
            })
            .register("bump", "bump[:<width>], Gaussian bump at ½ over a 0.1 floor", |arg, grid| {
                let width = match arg {
                    Some(_) => parse_arg("bump", arg)?,
                    None => 0.08,
                };
                if width <= 0.0 {
                    return Err(Error::InvalidParameter(format!("bump width must be > 0, got {width}")));
                }
                profile(*grid, |x| 0.1 + (-(x - 0.5).powi(2) / (2.0 * width * width)).exp())
            })
            .register("uniform", "p ≡ 1", |arg, grid| {
                reject_arg("uniform", arg)?;
                Ok(Arc::new(Density::uniform(*grid)))
            })
            .register("ramp", "linear ramp 2x", |arg, grid| {
                reject_arg("ramp", arg)?;
                profile(*grid, |x| 2.0 * x)
            })
    })
}

pub fn initial_condition(name: &str, grid: Grid) -> Result<Density> {
    Ok(initial_conditions().resolve(name, &grid)?.as_ref().clone())
}
