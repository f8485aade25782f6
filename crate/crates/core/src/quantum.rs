//! Closed-form evolution of a single eigenmode under a possibly non-Hermitian
//! Hamiltonian with eigenvalue `E = ε + iγ`:
//!
//! ψ(x,t) = ψ₀(x) e^{−iEt/ħ},  |ψ(x,t)|² = |ψ₀(x)|² e^{2γt/ħ}.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use crate::convex::ConvexFn;
use crate::density::{Density, Grid};
use crate::error::{Error, Result};
use crate::registry::{parse_arg, reject_arg, Registry};
use crate::trajectory::{Snapshot, Source, Trajectory};

/// Allowed deviation of the initial norm from 1.
pub const NORM_CHECK: f64 = 1e-9;
/// Slack in the decay-bound comparison.
pub const BOUND_SLACK: f64 = 1e-12;

/// Shape of the initial eigenfunction.
pub trait InitialMode: Send + Sync {
    fn name(&self) -> String;
    /// Unnormalized samples at the cell centers.
    fn sample(&self, grid: Grid) -> Vec<Complex64>;
}

/// ψ₀ ∝ sin(kπx), vanishing at both walls.
#[derive(Debug, Clone, Copy)]
pub struct SineMode {
    pub k: u32,
}

impl InitialMode for SineMode {
    fn name(&self) -> String {
        format!("sine:{}", self.k)
    }
    fn sample(&self, grid: Grid) -> Vec<Complex64> {
        grid.centers()
            .map(|x| Complex64::new((self.k as f64 * PI * x).sin(), 0.0))
            .collect()
    }
}

/// Gaussian bump with |ψ₀|² of standard deviation `width`, centered at ½.
#[derive(Debug, Clone, Copy)]
pub struct GaussMode {
    pub width: f64,
}

impl InitialMode for GaussMode {
    fn name(&self) -> String {
        "gauss".into()
    }
    fn sample(&self, grid: Grid) -> Vec<Complex64> {
        let s2 = 4.0 * self.width * self.width;
        grid.centers()
            .map(|x| Complex64::new((-(x - 0.5).powi(2) / s2).exp(), 0.0))
            .collect()
    }
}

pub fn registry() -> &'static Registry<dyn InitialMode> {
    static REGISTRY: OnceLock<Registry<dyn InitialMode>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        Registry::<dyn InitialMode>::new("quantum mode")
            .register("sine", "sine:<k>, √2 sin(kπx)", |arg, _| {
                let k = parse_arg("sine", arg)?;
                if k < 1.0 || k.fract() != 0.0 {
                    return Err(Error::InvalidParameter(format!("sine index must be a positive integer, got {k}")));
                }
                Ok(Arc::new(SineMode { k: k as u32 }))
            })
            .register("gauss", "normalized Gaussian bump at ½", |arg, _| {
                reject_arg("gauss", arg)?;
                Ok(Arc::new(GaussMode { width: 0.1 }))
            })
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumMode {
    grid: Grid,
    psi0: Vec<Complex64>,
    pub epsilon: f64,
    pub gamma: f64,
    pub hbar: f64,
}

impl QuantumMode {
    /// Takes ψ₀ as given; its norm must be 1 within [`NORM_CHECK`].
    pub fn new(grid: Grid, psi0: Vec<Complex64>, epsilon: f64, gamma: f64, hbar: f64) -> Result<Self> {
        if psi0.len() != grid.n_cells() {
            return Err(Error::ValueCount {
                expected: grid.n_cells(),
                got: psi0.len(),
            });
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidParameter(format!("hbar must be > 0, got {hbar}")));
        }
        if !epsilon.is_finite() || !gamma.is_finite() {
            return Err(Error::InvalidParameter("energy must be finite".into()));
        }
        let norm = grid.h() * psi0.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if (norm - 1.0).abs() > NORM_CHECK {
            return Err(Error::InvalidParameter(format!("initial norm is {norm}, expected 1")));
        }
        Ok(Self {
            grid,
            psi0,
            epsilon,
            gamma,
            hbar,
        })
    }

    /// Samples a registered mode (`sine:k`, `gauss`) and normalizes it on the grid.
    pub fn from_spec(spec: &str, grid: Grid, epsilon: f64, gamma: f64, hbar: f64) -> Result<Self> {
        let raw = registry().resolve(spec, &())?.sample(grid);
        let norm = grid.h() * raw.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if !(norm > 0.0) {
            return Err(Error::InvalidParameter(format!("mode `{spec}` vanishes on this grid")));
        }
        let scale = norm.sqrt().recip();
        Self::new(grid, raw.into_iter().map(|z| z * scale).collect(), epsilon, gamma, hbar)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn psi0(&self) -> &[Complex64] {
        &self.psi0
    }

    /// e^{2γt/ħ}
    pub fn decay_factor(&self, t: f64) -> f64 {
        (2.0 * self.gamma * t / self.hbar).exp()
    }

    /// ψ(x,t) at the cell centers.
    pub fn wavefunction(&self, t: f64) -> Vec<Complex64> {
        let phase = Complex64::new(self.gamma, -self.epsilon) * (t / self.hbar);
        let factor = phase.exp();
        self.psi0.iter().map(|z| z * factor).collect()
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")))
    }
}

/// |ψ(x,t)|² from the closed form; at γ = 0 identical to the t = 0 density.
pub fn mode_density(mode: &QuantumMode, t: f64) -> Result<Density> {
    check_time(t)?;
    let factor = mode.decay_factor(t);
    Density::new(
        mode.grid,
        mode.psi0.iter().map(|z| z.norm_sqr() * factor).collect(),
    )
}

/// `(2γ/ħ) ∫ φ′(p) p dx` for a density `p = |ψ|²`.
pub fn lambda_prime_from_density(d: &Density, gamma: f64, hbar: f64, phi: &dyn ConvexFn) -> Result<f64> {
    if !phi.differentiable() {
        return Err(Error::NonDifferentiablePhi(phi.id().to_string()));
    }
    // p φ′(p) → 0 as p → 0 for every bank member, including x ln x
    let integral = d.integrate(|v| if v == 0.0 { 0.0 } else { phi.d1(v) * v });
    Ok(2.0 * gamma / hbar * integral)
}

pub fn quantum_lambda_prime(mode: &QuantumMode, t: f64, phi: &dyn ConvexFn) -> Result<f64> {
    let d = mode_density(mode, t)?;
    lambda_prime_from_density(&d, mode.gamma, mode.hbar, phi)
}

/// Decay bound `λ′_φ ≤ (2γ/ħ) φ′(0) ∫|ψ|²` evaluated at one time, next to the
/// bound without the norm factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub lhs: f64,
    /// `(2γ/ħ) φ′(0) · mass(t)`
    pub rhs: f64,
    pub holds: bool,
    /// `(2γ/ħ) φ′(0)`
    pub rhs_bare: f64,
    pub holds_bare: bool,
}

impl BoundCheck {
    /// The two right-hand sides disagree beyond round-off (decayed norm).
    pub fn bounds_differ(&self) -> bool {
        (self.rhs - self.rhs_bare).abs() > BOUND_SLACK * self.rhs_bare.abs().max(1.0)
    }
}

pub fn nonhermitian_bound_check(mode: &QuantumMode, t: f64, phi: &dyn ConvexFn) -> Result<BoundCheck> {
    if mode.gamma >= 0.0 {
        return Err(Error::PositiveGamma(mode.gamma));
    }
    if !phi.increasing() {
        return Err(Error::NonIncreasingPhi(phi.id().to_string()));
    }
    let d = mode_density(mode, t)?;
    let lhs = lambda_prime_from_density(&d, mode.gamma, mode.hbar, phi)?;
    let rhs_bare = 2.0 * mode.gamma / mode.hbar * phi.d1(0.0);
    let rhs = rhs_bare * d.mass();
    let slack = |r: f64| BOUND_SLACK * r.abs().max(lhs.abs()).max(1.0);
    Ok(BoundCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + slack(rhs),
        rhs_bare,
        holds_bare: lhs <= rhs_bare + slack(rhs_bare),
    })
}

pub fn quantum_trajectory(mode: &QuantumMode, snapshot_times: &[f64]) -> Result<Trajectory> {
    let snapshots = snapshot_times
        .iter()
        .map(|&t| {
            Ok(Snapshot {
                t,
                density: mode_density(mode, t)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(
        snapshots,
        Source::Quantum {
            gamma: mode.gamma,
            hbar: mode.hbar,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::lookup as phi;

    fn sine(gamma: f64) -> QuantumMode {
        QuantumMode::from_spec("sine:1", Grid::new(256).unwrap(), 1.0, gamma, 1.0).unwrap()
    }

    #[test]
    fn hermitian_density_is_frozen() {
        let m = sine(0.0);
        let d0 = mode_density(&m, 0.0).unwrap();
        for t in [0.3, 10.0, 1e4] {
            assert_eq!(mode_density(&m, t).unwrap(), d0);
        }
    }

    #[test]
    fn decaying_mass() {
        let m = sine(-0.1);
        assert!((mode_density(&m, 0.0).unwrap().mass() - 1.0).abs() < 1e-12);
        let m5 = mode_density(&m, 5.0).unwrap().mass();
        assert!((m5 - (-1.0f64).exp()).abs() < 1e-12);
        assert!(mode_density(&m, -1.0).is_err());
    }

    #[test]
    fn wavefunction_modulus_matches_density() {
        let m = QuantumMode::from_spec("gauss", Grid::new(64).unwrap(), 2.5, -0.3, 0.7).unwrap();
        let psi = m.wavefunction(1.3);
        let d = mode_density(&m, 1.3).unwrap();
        for (z, v) in psi.iter().zip(d.values()) {
            assert!((z.norm_sqr() - v).abs() <= 1e-12 * v.max(1.0));
        }
    }

    #[test]
    fn lambda_prime_examples() {
        let herm = sine(0.0);
        for id in ["x", "x2", "xlogx", "exp"] {
            assert_eq!(quantum_lambda_prime(&herm, 1.0, phi(id).unwrap().as_ref()).unwrap(), 0.0);
        }
        let m = sine(-0.1);
        let linear = quantum_lambda_prime(&m, 0.0, phi("x").unwrap().as_ref()).unwrap();
        assert!((linear + 0.2).abs() < 1e-14);
        let sq = quantum_lambda_prime(&m, 0.0, phi("x2").unwrap().as_ref()).unwrap();
        let quartic = m.grid().h() * m.psi0().iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>();
        assert!((sq - 4.0 * -0.1 * quartic).abs() < 1e-14);
        assert!(matches!(
            quantum_lambda_prime(&m, 0.0, phi("hinge:1").unwrap().as_ref()),
            Err(Error::NonDifferentiablePhi(_))
        ));
    }

    #[test]
    fn bound_check() {
        let m = sine(-0.1);
        let lin = nonhermitian_bound_check(&m, 0.0, phi("x").unwrap().as_ref()).unwrap();
        assert!(lin.holds);
        assert!((lin.lhs - lin.rhs).abs() < 1e-14);
        let e = nonhermitian_bound_check(&m, 0.0, phi("exp").unwrap().as_ref()).unwrap();
        assert!(e.holds && e.lhs < e.rhs - 1e-3);
        let late = nonhermitian_bound_check(&m, 10.0, phi("x").unwrap().as_ref()).unwrap();
        assert!(late.bounds_differ());
        assert!(late.holds);
        assert!(matches!(
            nonhermitian_bound_check(&sine(0.0), 0.0, phi("x").unwrap().as_ref()),
            Err(Error::PositiveGamma(_))
        ));
        assert!(matches!(
            nonhermitian_bound_check(&m, 0.0, phi("xlogx").unwrap().as_ref()),
            Err(Error::NonIncreasingPhi(_))
        ));
    }

    #[test]
    fn construction_errors() {
        let g = Grid::new(8).unwrap();
        assert!(QuantumMode::new(g, vec![Complex64::new(1.0, 0.0); 8], 0.0, 0.0, 1.0).is_ok());
        assert!(QuantumMode::new(g, vec![Complex64::new(2.0, 0.0); 8], 0.0, 0.0, 1.0).is_err());
        assert!(QuantumMode::new(g, vec![Complex64::new(1.0, 0.0); 8], 0.0, 0.0, 0.0).is_err());
        assert!(QuantumMode::from_spec("sine:0", g, 0.0, 0.0, 1.0).is_err());
        assert!(QuantumMode::from_spec("sine:1.5", g, 0.0, 0.0, 1.0).is_err());
        assert!(QuantumMode::from_spec("cos:1", g, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn trajectory_tags_source() {
        let t = quantum_trajectory(&sine(-0.1), &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(t.source().tag(), "quantum");
        assert!(quantum_trajectory(&sine(-0.1), &[1.0, 0.5]).is_err());
    }
}
