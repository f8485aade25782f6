//! Convex test functions φ used as monotone certificates `λ_φ = ∫ φ(p) dx`.
//!
//! Arguments are density values, which may exceed 1, so every member is
//! convex on `[0, ∞)`. Members are resolved by id through [`registry`]:
//!
//! | id            | φ(x)            | increasing | differentiable |
//! |---------------|-----------------|------------|----------------|
//! | `xlogx`       | x ln x          | no         | yes            |
//! | `x`           | x               | yes        | yes            |
//! | `x2`, `x3`    | x², x³          | yes        | yes            |
//! | `x1.5`        | x^{3/2}         | yes        | yes            |
//! | `pow:<q>`     | x^q, q ≥ 1      | yes        | yes            |
//! | `exp`         | eˣ              | yes        | yes            |
//! | `abs`         | \|x\|           | no         | no             |
//! | `absdev:<c>`  | \|x − c\|       | no         | no             |
//! | `hinge:<a>`   | (x − a)₊        | yes        | no             |

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::density::Density;
use crate::error::{Error, Result};
use crate::registry::{parse_arg, reject_arg, Registry};

pub trait ConvexFn: Send + Sync + fmt::Debug {
    fn id(&self) -> &str;
    fn eval(&self, x: f64) -> f64;
    /// φ′. For kinked members this is the right derivative.
    fn d1(&self, x: f64) -> f64;
    /// φ″. For kinked members this is zero away from the kink.
    fn d2(&self, x: f64) -> f64;
    /// Member of the increasing convex class.
    fn increasing(&self) -> bool;
    fn differentiable(&self) -> bool {
        true
    }
}

/// `λ_φ(p) = ∫ φ(p(x)) dx` by the midpoint rule.
pub fn lambda(d: &Density, phi: &dyn ConvexFn) -> f64 {
    d.integrate(|v| phi.eval(v))
}

/// x ln x with 0 ln 0 = 0.
#[derive(Debug, Clone, Copy)]
pub struct XLogX;

impl ConvexFn for XLogX {
    fn id(&self) -> &str {
        "xlogx"
    }
    fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            x * x.ln()
        }
    }
    fn d1(&self, x: f64) -> f64 {
        x.ln() + 1.0
    }
    fn d2(&self, x: f64) -> f64 {
        1.0 / x
    }
    fn increasing(&self) -> bool {
        false
    }
}

/// x^q on `[0, ∞)`, q ≥ 1. Negative arguments are clamped to 0.
#[derive(Debug, Clone)]
pub struct Power {
    id: String,
    q: f64,
}

impl Power {
    pub fn new(q: f64) -> Result<Self> {
        Self::with_id(format!("pow:{q}"), q)
    }

    fn with_id(id: String, q: f64) -> Result<Self> {
        if !(q >= 1.0) {
            return Err(Error::InvalidParameter(format!("power exponent must be >= 1, got {q}")));
        }
        Ok(Self { id, q })
    }
}

impl ConvexFn for Power {
    fn id(&self) -> &str {
        &self.id
    }
    fn eval(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        match self.q {
            q if q == 1.0 => x,
            q if q == 2.0 => x * x,
            q if q == 3.0 => x * x * x,
            q => x.powf(q),
        }
    }
    fn d1(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        match self.q {
            q if q == 1.0 => 1.0,
            q if q == 2.0 => 2.0 * x,
            q => q * x.powf(q - 1.0),
        }
    }
    fn d2(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        match self.q {
            q if q == 1.0 => 0.0,
            q if q == 2.0 => 2.0,
            q => q * (q - 1.0) * x.powf(q - 2.0),
        }
    }
    fn increasing(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Exp;

impl ConvexFn for Exp {
    fn id(&self) -> &str {
        "exp"
    }
    fn eval(&self, x: f64) -> f64 {
        x.exp()
    }
    fn d1(&self, x: f64) -> f64 {
        x.exp()
    }
    fn d2(&self, x: f64) -> f64 {
        x.exp()
    }
    fn increasing(&self) -> bool {
        true
    }
}

/// |x − c|. With c = 0 this is `abs`, the L¹ integrand for signed observables.
#[derive(Debug, Clone)]
pub struct AbsDev {
    id: String,
    c: f64,
}

impl ConvexFn for AbsDev {
    fn id(&self) -> &str {
        &self.id
    }
    fn eval(&self, x: f64) -> f64 {
        (x - self.c).abs()
    }
    fn d1(&self, x: f64) -> f64 {
        if x >= self.c {
            1.0
        } else {
            -1.0
        }
    }
    fn d2(&self, _x: f64) -> f64 {
        0.0
    }
    fn increasing(&self) -> bool {
        false
    }
    fn differentiable(&self) -> bool {
        false
    }
}

/// (x − a)₊
#[derive(Debug, Clone)]
pub struct Hinge {
    id: String,
    a: f64,
}

impl Hinge {
    pub fn new(a: f64) -> Self {
        Self {
            id: format!("hinge:{a}"),
            a,
        }
    }

    pub fn threshold(&self) -> f64 {
        self.a
    }
}

impl ConvexFn for Hinge {
    fn id(&self) -> &str {
        &self.id
    }
    fn eval(&self, x: f64) -> f64 {
        (x - self.a).max(0.0)
    }
    fn d1(&self, x: f64) -> f64 {
        if x >= self.a {
            1.0
        } else {
            0.0
        }
    }
    fn d2(&self, _x: f64) -> f64 {
        0.0
    }
    fn increasing(&self) -> bool {
        true
    }
    fn differentiable(&self) -> bool {
        false
    }
}

pub fn registry() -> &'static Registry<dyn ConvexFn> {
    static REGISTRY: OnceLock<Registry<dyn ConvexFn>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        Registry::<dyn ConvexFn>::new("convex function")
            .register("xlogx", "x ln x (entropy integrand)", |arg, _| {
                reject_arg("xlogx", arg)?;
                Ok(Arc::new(XLogX))
            })
            .register("x", "linear, convex and increasing", |arg, _| {
                reject_arg("x", arg)?;
                Ok(Arc::new(Power::with_id("x".into(), 1.0)?))
            })
            .register("x2", "x^2", |arg, _| {
                reject_arg("x2", arg)?;
                Ok(Arc::new(Power::with_id("x2".into(), 2.0)?))
            })
            .register("x1.5", "x^(3/2)", |arg, _| {
                reject_arg("x1.5", arg)?;
                Ok(Arc::new(Power::with_id("x1.5".into(), 1.5)?))
            })
            .register("x3", "x^3", |arg, _| {
                reject_arg("x3", arg)?;
                Ok(Arc::new(Power::with_id("x3".into(), 3.0)?))
            })
            .register("pow", "pow:<q>, x^q with q >= 1", |arg, _| {
                Ok(Arc::new(Power::new(parse_arg("pow", arg)?)?))
            })
            .register("exp", "e^x", |arg, _| {
                reject_arg("exp", arg)?;
                Ok(Arc::new(Exp))
            })
            .register("abs", "|x|", |arg, _| {
                reject_arg("abs", arg)?;
                Ok(Arc::new(AbsDev {
                    id: "abs".into(),
                    c: 0.0,
                }))
            })
            .register("absdev", "absdev:<c>, |x - c|", |arg, _| {
                let c = parse_arg("absdev", arg)?;
                Ok(Arc::new(AbsDev {
                    id: format!("absdev:{c}"),
                    c,
                }))
            })
            .register("hinge", "hinge:<a>, (x - a)_+", |arg, _| {
                Ok(Arc::new(Hinge::new(parse_arg("hinge", arg)?)))
            })
    })
}

pub fn lookup(id: &str) -> Result<Arc<dyn ConvexFn>> {
    registry().resolve(id, &())
}

pub const STANDARD_IDS: &[&str] = &[
    "xlogx",
    "x2",
    "x1.5",
    "x3",
    "abs",
    "hinge:0.25",
    "hinge:0.5",
    "hinge:1",
    "hinge:2",
    "hinge:4",
    "exp",
];

/// Ordered list of test functions with unique ids.
#[derive(Debug, Clone)]
pub struct Battery {
    members: Vec<Arc<dyn ConvexFn>>,
}

impl Battery {
    pub fn new(members: Vec<Arc<dyn ConvexFn>>) -> Result<Self> {
        for (i, m) in members.iter().enumerate() {
            if members[..i].iter().any(|o| o.id() == m.id()) {
                return Err(Error::InvalidParameter(format!("duplicate battery id `{}`", m.id())));
            }
        }
        Ok(Self { members })
    }

    pub fn from_ids<S: AsRef<str>>(ids: &[S]) -> Result<Self> {
        Self::new(ids.iter().map(|id| lookup(id.as_ref())).collect::<Result<_>>()?)
    }

    pub fn standard() -> Self {
        Self::from_ids(STANDARD_IDS).expect("standard ids resolve")
    }

    /// Increasing members of the standard battery plus `x`.
    pub fn icx() -> Self {
        let mut members: Vec<_> = Self::standard()
            .members
            .into_iter()
            .filter(|m| m.increasing())
            .collect();
        members.push(lookup("x").expect("x resolves"));
        Self::new(members).expect("icx ids are unique")
    }

    /// Standard battery extended with `count` hinges spread over `[0, top]`.
    pub fn with_hinge_grid(mut self, top: f64, count: usize) -> Result<Self> {
        for i in 0..count {
            let a = if count > 1 { top * i as f64 / (count - 1) as f64 } else { 0.0 };
            let hinge = Hinge::new(a);
            if self.get(hinge.id()).is_none() {
                self.members.push(Arc::new(hinge));
            }
        }
        Ok(self)
    }

    pub fn members(&self) -> &[Arc<dyn ConvexFn>] {
        &self.members
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<dyn ConvexFn>> {
        self.members.iter()
    }

    pub fn differentiable(&self) -> impl Iterator<Item = &Arc<dyn ConvexFn>> {
        self.members.iter().filter(|m| m.differentiable())
    }

    pub fn get(&self, id: &str) -> Option<&Arc<dyn ConvexFn>> {
        self.members.iter().find(|m| m.id() == id)
    }

    pub fn ids(&self) -> Vec<String> {
        self.members.iter().map(|m| m.id().to_string()).collect()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchurClass {
    SchurConvex,
    /// Symmetric and quasi-convex.
    QuasiConvex,
}

/// A symmetric function of a whole vector, monotone along the majorization
/// order.
pub struct VectorTestFn {
    pub id: String,
    pub class: SchurClass,
    f: Box<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl VectorTestFn {
    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

impl fmt::Debug for VectorTestFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorTestFn")
            .field("id", &self.id)
            .field("class", &self.class)
            .finish()
    }
}

fn max_component(x: &[f64]) -> f64 {
    x.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn top_k_sum(x: &[f64], k: usize) -> f64 {
    let mut v = x.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v.iter().take(k).sum()
}

/// Sample Schur-convex and symmetric quasi-convex functions on n-vectors.
pub fn schur_samples(n: usize) -> Result<Vec<VectorTestFn>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("schur samples need n >= 2, got {n}")));
    }
    let mut out = vec![
        VectorTestFn {
            id: "max".into(),
            class: SchurClass::SchurConvex,
            f: Box::new(max_component),
        },
        VectorTestFn {
            id: "sum_squares".into(),
            class: SchurClass::SchurConvex,
            f: Box::new(|x| x.iter().map(|v| v * v).sum()),
        },
        VectorTestFn {
            id: "neg_entropy".into(),
            class: SchurClass::SchurConvex,
            f: Box::new(|x| x.iter().map(|&v| XLogX.eval(v)).sum()),
        },
        VectorTestFn {
            id: "log1p_max".into(),
            class: SchurClass::QuasiConvex,
            f: Box::new(|x| max_component(x).ln_1p()),
        },
    ];
    for k in 2..n {
        out.push(VectorTestFn {
            id: format!("top{k}_sum"),
            class: SchurClass::QuasiConvex,
            f: Box::new(move |x| top_k_sum(x, k)),
        });
    }
    Ok(out)
}
