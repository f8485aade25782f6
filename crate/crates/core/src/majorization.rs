//! Majorization and weak majorization of grid densities and vectors.
//!
//! `f ≺ g` is decided with the rearrangement criterion: sort both value
//! vectors in non-increasing order and compare cumulative sums. For
//! piecewise-constant densities on a common uniform grid this is exact, since
//! the partial-sum curves are linear between cell boundaries.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::Zero;

use crate::density::Density;
use crate::error::{Error, Result};

/// Relative tolerance on cumulative sums.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Tolerance on `|mass - 1|` for probability densities.
pub const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    /// `g ≺ f`
    Majorizes,
    /// `f ≺ g`
    MajorizedBy,
    Equivalent,
    Incomparable,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Majorizes => "majorizes",
            Relation::MajorizedBy => "majorized-by",
            Relation::Equivalent => "equivalent",
            Relation::Incomparable => "incomparable",
        })
    }
}

/// Why one direction of the order fails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Failure {
    /// Total masses differ (only for strict majorization).
    Mass { lhs: f64, rhs: f64 },
    /// The sum of the `k` largest cells of the left operand exceeds the right
    /// one by `excess`.
    Cumulative { k: usize, excess: f64 },
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Mass { lhs, rhs } => write!(f, "mass {lhs} != {rhs}"),
            Failure::Cumulative { k, excess } => write!(f, "top-{k} sum exceeds by {excess:e}"),
        }
    }
}

/// Failures in both directions, carried by an `Incomparable` verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    /// Why `f ≺ g` fails.
    pub forward: Failure,
    /// Why `g ≺ f` fails.
    pub backward: Failure,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub relation: Relation,
    /// Present exactly when `relation` is `Incomparable`.
    pub witness: Option<Witness>,
    forward: Option<Failure>,
    backward: Option<Failure>,
}

impl Verdict {
    fn from_directions(forward: Option<Failure>, backward: Option<Failure>) -> Self {
        let (relation, witness) = match (forward, backward) {
            (None, None) => (Relation::Equivalent, None),
            (None, Some(_)) => (Relation::MajorizedBy, None),
            (Some(_), None) => (Relation::Majorizes, None),
            (Some(forward), Some(backward)) => {
                (Relation::Incomparable, Some(Witness { forward, backward }))
            }
        };
        Verdict {
            relation,
            witness,
            forward,
            backward,
        }
    }

    /// Why `f ≺ g` fails, if it does.
    pub fn forward_failure(&self) -> Option<Failure> {
        self.forward
    }

    /// Why `g ≺ f` fails, if it does.
    pub fn backward_failure(&self) -> Option<Failure> {
        self.backward
    }

    /// True when `f ≺ g` holds (including equivalence).
    pub fn is_majorized_by(&self) -> bool {
        matches!(self.relation, Relation::MajorizedBy | Relation::Equivalent)
    }

    /// True when `g ≺ f` holds (including equivalence).
    pub fn majorizes(&self) -> bool {
        matches!(self.relation, Relation::Majorizes | Relation::Equivalent)
    }
}

/// Values sorted in non-increasing order on the same grid. Ties keep their
/// original order.
pub fn decreasing_rearrangement(d: &Density) -> Density {
    let values = sorted_desc(d.values());
    Density::new(d.grid(), values).expect("a permutation of a valid density is valid")
}

fn sorted_desc(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// `h * (sum of the k largest values)` for k = 1..=n.
fn top_sums(d: &Density) -> Vec<f64> {
    let h = d.grid().h();
    let mut acc = 0.0;
    sorted_desc(d.values())
        .into_iter()
        .map(|v| {
            acc += v;
            h * acc
        })
        .collect()
}

fn first_excess(lhs: &[f64], rhs: &[f64], slack: f64) -> Option<Failure> {
    lhs.iter()
        .zip(rhs)
        .enumerate()
        .find(|(_, (a, b))| **a > **b + slack)
        .map(|(i, (a, b))| Failure::Cumulative { k: i + 1, excess: a - b })
}

fn slack(f: &Density, g: &Density, tol: f64) -> f64 {
    tol * f.mass().abs().max(g.mass().abs()).max(1.0)
}

/// Checks `f ≺ g` and returns the first failure, if any.
pub fn majorization_failure(f: &Density, g: &Density, tol: f64) -> Result<Option<Failure>> {
    f.grid().check_same(&g.grid())?;
    let s = slack(f, g, tol);
    if (f.mass() - g.mass()).abs() > s {
        return Ok(Some(Failure::Mass {
            lhs: f.mass(),
            rhs: g.mass(),
        }));
    }
    Ok(first_excess(&top_sums(f), &top_sums(g), s))
}

/// Checks `f ≺_w g` (sums of largest values only, totals compared with `≤`).
pub fn weak_majorization_failure(f: &Density, g: &Density, tol: f64) -> Result<Option<Failure>> {
    f.grid().check_same(&g.grid())?;
    Ok(first_excess(&top_sums(f), &top_sums(g), slack(f, g, tol)))
}

pub fn compare_continuous(f: &Density, g: &Density, tol: f64) -> Result<Verdict> {
    f.grid().check_same(&g.grid())?;
    let s = slack(f, g, tol);
    let (sf, sg) = (top_sums(f), top_sums(g));
    let mass = if (f.mass() - g.mass()).abs() > s {
        Some((
            Failure::Mass {
                lhs: f.mass(),
                rhs: g.mass(),
            },
            Failure::Mass {
                lhs: g.mass(),
                rhs: f.mass(),
            },
        ))
    } else {
        None
    };
    let forward = mass.map(|m| m.0).or_else(|| first_excess(&sf, &sg, s));
    let backward = mass.map(|m| m.1).or_else(|| first_excess(&sg, &sf, s));
    Ok(Verdict::from_directions(forward, backward))
}

pub fn compare_weak(f: &Density, g: &Density, tol: f64) -> Result<Verdict> {
    f.grid().check_same(&g.grid())?;
    let s = slack(f, g, tol);
    let (sf, sg) = (top_sums(f), top_sums(g));
    Ok(Verdict::from_directions(
        first_excess(&sf, &sg, s),
        first_excess(&sg, &sf, s),
    ))
}

/// Scalars whose partial sums can be formed exactly.
pub trait ExactScalar {
    /// `None` for values with no exact rational form (NaN, infinities).
    fn to_exact(&self) -> Option<BigRational>;
}

/// A float is read as the decimal it prints as (shortest round-trip form), so
/// `0.4 + 0.35 + 0.25` sums to exactly one.
impl ExactScalar for f64 {
    fn to_exact(&self) -> Option<BigRational> {
        if !self.is_finite() {
            return None;
        }
        let text = format!("{:e}", self);
        let (mantissa, exponent) = text.split_once('e')?;
        let exponent: i64 = exponent.parse().ok()?;
        let (negative, mantissa) = match mantissa.strip_prefix('-') {
            Some(m) => (true, m),
            None => (false, mantissa),
        };
        let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
        let digits: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
        let scale = exponent - frac_part.len() as i64;
        let ten = BigInt::from(10);
        let mut value = if scale >= 0 {
            BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
        } else {
            BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
        };
        if negative {
            value = -value;
        }
        Some(value)
    }
}

impl ExactScalar for i64 {
    fn to_exact(&self) -> Option<BigRational> {
        Some(BigRational::from_integer(BigInt::from(*self)))
    }
}

impl ExactScalar for Ratio<i64> {
    fn to_exact(&self) -> Option<BigRational> {
        Some(BigRational::new(BigInt::from(*self.numer()), BigInt::from(*self.denom())))
    }
}

impl ExactScalar for BigRational {
    fn to_exact(&self) -> Option<BigRational> {
        Some(self.clone())
    }
}

fn exact_top_sums<T: ExactScalar>(x: &[T]) -> Result<Vec<BigRational>> {
    let mut v = x
        .iter()
        .enumerate()
        .map(|(index, c)| {
            c.to_exact().ok_or(Error::InvalidValue {
                index,
                value: f64::NAN,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    v.sort_by(|a, b| b.cmp(a));
    let mut acc = BigRational::zero();
    Ok(v.into_iter()
        .map(|c| {
            acc += c;
            acc.clone()
        })
        .collect())
}

fn approx(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

fn exact_failure(lhs: &[BigRational], rhs: &[BigRational]) -> Option<Failure> {
    let n = lhs.len();
    if lhs[n - 1] != rhs[n - 1] {
        return Some(Failure::Mass {
            lhs: approx(&lhs[n - 1]),
            rhs: approx(&rhs[n - 1]),
        });
    }
    lhs.iter()
        .zip(rhs)
        .enumerate()
        .find(|(_, (a, b))| a.cmp(b) == Ordering::Greater)
        .map(|(i, (a, b))| Failure::Cumulative {
            k: i + 1,
            excess: approx(&(a - b)),
        })
}

/// Discrete majorization `x ≺ y` with exact rational partial sums.
pub fn compare_discrete<T: ExactScalar>(x: &[T], y: &[T]) -> Result<Verdict> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::InvalidParameter("vectors must be non-empty".into()));
    }
    let (sx, sy) = (exact_top_sums(x)?, exact_top_sums(y)?);
    Ok(Verdict::from_directions(exact_failure(&sx, &sy), exact_failure(&sy, &sx)))
}

/// `∫ (p - a)_+ dx` by the midpoint rule.
pub fn hinge_integral(d: &Density, a: f64) -> f64 {
    d.integrate(|v| (v - a).max(0.0))
}

/// First threshold `a` with `∫(f-a)_+ > ∫(g-a)_+`, i.e. a convex hinge
/// proving `f ⊀ g`. Uses [`DEFAULT_TOL`] as relative slack.
pub fn hinge_witness(f: &Density, g: &Density, thresholds: &[f64]) -> Result<Option<f64>> {
    hinge_witness_with_tol(f, g, thresholds, DEFAULT_TOL)
}

pub fn hinge_witness_with_tol(
    f: &Density,
    g: &Density,
    thresholds: &[f64],
    tol: f64,
) -> Result<Option<f64>> {
    f.grid().check_same(&g.grid())?;
    if thresholds.is_empty() {
        return Err(Error::InvalidParameter("no hinge thresholds given".into()));
    }
    Ok(thresholds.iter().copied().find(|&a| {
        let (lf, lg) = (hinge_integral(f, a), hinge_integral(g, a));
        lf > lg + tol * lg.abs().max(1.0)
    }))
}

/// `count` evenly spaced thresholds on `[0, max value of f and g]`.
pub fn hinge_thresholds(f: &Density, g: &Density, count: usize) -> Vec<f64> {
    let top = f.max_value().max(g.max_value());
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count).map(|i| top * i as f64 / (count - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::Grid;

    fn density(values: &[f64]) -> Density {
        Density::new(Grid::new(values.len()).unwrap(), values.to_vec()).unwrap()
    }

    #[test]
    fn rearrangement_sorts() {
        let d = density(&[1.0, 3.0, 2.0]);
        assert_eq!(decreasing_rearrangement(&d).values(), &[3.0, 2.0, 1.0]);
        let u = Density::uniform(Grid::new(5).unwrap());
        assert_eq!(decreasing_rearrangement(&u), u);
        assert_eq!(decreasing_rearrangement(&d).mass(), d.mass());
    }

    #[test]
    fn uniform_below_delta() {
        let g = Grid::new(16).unwrap();
        let v = compare_continuous(&Density::uniform(g), &Density::delta(g, 5), DEFAULT_TOL).unwrap();
        assert_eq!(v.relation, Relation::MajorizedBy);
        assert!(v.witness.is_none());
    }

    #[test]
    fn self_equivalent() {
        let d = density(&[0.2, 1.7, 0.9, 1.2]);
        assert_eq!(compare_continuous(&d, &d, DEFAULT_TOL).unwrap().relation, Relation::Equivalent);
        assert_eq!(compare_weak(&d, &d, DEFAULT_TOL).unwrap().relation, Relation::Equivalent);
    }

    #[test]
    fn crossing_steps_are_incomparable() {
        let f = density(&[1.8, 0.6, 0.6]);
        let g = density(&[1.5, 1.35, 0.15]);
        let v = compare_continuous(&f, &g, DEFAULT_TOL).unwrap();
        assert_eq!(v.relation, Relation::Incomparable);
        let w = v.witness.unwrap();
        match w.forward {
            Failure::Cumulative { k, excess } => {
                assert_eq!(k, 1);
                assert!((excess - 0.1).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(w.backward, Failure::Cumulative { k: 2, .. }));
    }

    #[test]
    fn mass_mismatch_is_incomparable_but_weakly_ordered() {
        let g = Grid::new(8).unwrap();
        let half = Density::uniform(g).scaled(0.5).unwrap();
        let full = Density::uniform(g);
        let strict = compare_continuous(&half, &full, DEFAULT_TOL).unwrap();
        assert_eq!(strict.relation, Relation::Incomparable);
        assert!(matches!(strict.witness.unwrap().forward, Failure::Mass { .. }));
        assert_eq!(compare_weak(&half, &full, DEFAULT_TOL).unwrap().relation, Relation::MajorizedBy);
    }

    #[test]
    fn grid_mismatch() {
        let a = Density::uniform(Grid::new(4).unwrap());
        let b = Density::uniform(Grid::new(5).unwrap());
        assert!(matches!(
            compare_continuous(&a, &b, DEFAULT_TOL),
            Err(Error::GridMismatch { left: 4, right: 5 })
        ));
        assert!(compare_weak(&a, &b, DEFAULT_TOL).is_err());
        assert!(hinge_witness(&a, &b, &[0.5]).is_err());
    }

    #[test]
    fn discrete_examples() {
        let third = Ratio::new(1i64, 3);
        let uniform = [third; 3];
        let delta = [Ratio::from_integer(1i64), Ratio::from_integer(0), Ratio::from_integer(0)];
        assert_eq!(compare_discrete(&uniform, &delta).unwrap().relation, Relation::MajorizedBy);

        let v = compare_discrete(&[0.4, 0.35, 0.25], &[0.5, 0.3, 0.2]).unwrap();
        assert_eq!(v.relation, Relation::MajorizedBy);
        let dec = |n: i64| Ratio::new(n, 100);
        let v = compare_discrete(&[dec(40), dec(35), dec(25)], &[dec(50), dec(30), dec(20)]).unwrap();
        assert_eq!(v.relation, Relation::MajorizedBy);

        assert_eq!(
            compare_discrete(&[0.5, 0.5], &[0.5, 0.5]).unwrap().relation,
            Relation::Equivalent
        );
        assert_eq!(
            compare_discrete(&[3i64, 1, 2], &[2i64, 3, 1]).unwrap().relation,
            Relation::Equivalent
        );
    }

    #[test]
    fn discrete_errors_and_singletons() {
        assert!(matches!(
            compare_discrete(&[1.0, 2.0], &[1.0]),
            Err(Error::LengthMismatch { left: 2, right: 1 })
        ));
        assert!(compare_discrete::<f64>(&[], &[]).is_err());
        assert!(compare_discrete(&[f64::NAN], &[1.0]).is_err());
        assert_eq!(compare_discrete(&[2.0], &[2.0]).unwrap().relation, Relation::Equivalent);
        assert_eq!(compare_discrete(&[2.0], &[3.0]).unwrap().relation, Relation::Incomparable);
    }

    #[test]
    fn floats_read_as_decimals() {
        let r = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        assert_eq!(0.35f64.to_exact().unwrap(), r(35, 100));
        assert_eq!((-2.5e-7f64).to_exact().unwrap(), r(-25, 100_000_000));
        let big: BigInt = "150000000000000000000".parse().unwrap();
        assert_eq!(1.5e20f64.to_exact().unwrap(), BigRational::from_integer(big));
        assert_eq!(0.0f64.to_exact().unwrap(), r(0, 1));
        assert!(f64::INFINITY.to_exact().is_none());
    }

    #[test]
    fn hinge_witness_delta_vs_uniform() {
        let g = Grid::new(10).unwrap();
        let (delta, uni) = (Density::delta(g, 0), Density::uniform(g));
        let thresholds: Vec<f64> = (1..10).map(|i| 1.0 + i as f64 * 0.9).collect();
        let a = hinge_witness(&delta, &uni, &thresholds).unwrap().unwrap();
        assert!(a > 1.0 && a < 10.0);
        assert_eq!(hinge_witness(&uni, &delta, &hinge_thresholds(&uni, &delta, 50)).unwrap(), None);
        assert_eq!(hinge_witness(&uni, &uni, &thresholds).unwrap(), None);
        assert!(hinge_witness(&uni, &uni, &[]).is_err());
    }
}
