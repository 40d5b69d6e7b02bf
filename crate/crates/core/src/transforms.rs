//! Laplace–Stieltjes transforms: a closed-form catalog, grid-backed
//! transforms, and the small algebra (products, scaling, equilibrium)
//! needed to compare them.

use std::f64::consts::LN_2;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridTransform;
use crate::zeta;

/// Arguments below this use a Taylor expansion in the hyperbolic families.
const SERIES_CUTOFF: f64 = 1e-6;

/// Closed-form transforms.
///
/// The serialized form is externally tagged by the identifiers listed in
/// [`CatalogEntry::identifiers`], e.g. `{"exponential": {"mu": 1.0}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CatalogEntry {
    /// Point mass at `c`: `e^{-cs}`.
    Degenerate { c: f64 },
    /// Exponential with mean `mu`: `1/(1+mu s)`.
    Exponential { mu: f64 },
    /// Gamma with shape `a` and scale `b`: `(1+bs)^{-a}`.
    Gamma { a: f64, b: f64 },
    /// Atom of mass `p` at zero plus an exponential part with rate `beta`.
    ///
    /// `mu` is the mean `(1-p)/beta`; it is filled in by [`CatalogEntry::validated`]
    /// when omitted.
    #[serde(rename = "exp_mixture_atom")]
    ExpMixtureWithAtom {
        p: f64,
        beta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mu: Option<f64>,
    },
    /// Two-point law on `{0, m2/m1}` with moments `m1`, `m2`.
    TwoPoint { m1: f64, m2: f64 },
    /// `(sqrt(2s)/sinh sqrt(2s))^t`
    #[serde(rename = "sinh_t")]
    SinhFamily { t: f64 },
    /// `(1/cosh sqrt(2s))^t`
    #[serde(rename = "cosh_t")]
    CoshFamily { t: f64 },
    /// `(tanh sqrt(2s)/sqrt(2s))^t`
    #[serde(rename = "tanh_t")]
    TanhFamily { t: f64 },
    /// Riemann-zeta distribution: `zeta(a+s)/zeta(a)`.
    #[serde(rename = "zeta")]
    ZetaDist { a: f64 },
    /// `3 mu s / (sinh sqrt(3 mu s))^2`
    #[serde(rename = "scaled_sinh")]
    ScaledSinhSolution { mu: f64 },
}

/// Identifier and parameter schema of one catalog entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CatalogIdentifier {
    pub id: &'static str,
    pub params: &'static str,
    pub formula: &'static str,
}

impl CatalogEntry {
    pub fn identifiers() -> &'static [CatalogIdentifier] {
        &[
            CatalogIdentifier { id: "degenerate", params: "c >= 0", formula: "exp(-c s)" },
            CatalogIdentifier { id: "exponential", params: "mu > 0", formula: "1/(1+mu s)" },
            CatalogIdentifier { id: "gamma", params: "a > 0, b > 0", formula: "(1+b s)^-a" },
            CatalogIdentifier {
                id: "exp_mixture_atom",
                params: "0 <= p < 1, beta > 0, [mu = (1-p)/beta]",
                formula: "p + (1-p)/(1+s/beta)",
            },
            CatalogIdentifier {
                id: "two_point",
                params: "m1 > 0, m2 >= m1^2",
                formula: "1 - m1^2/m2 + (m1^2/m2) exp(-(m2/m1) s)",
            },
            CatalogIdentifier { id: "sinh_t", params: "t > 0", formula: "(sqrt(2s)/sinh sqrt(2s))^t" },
            CatalogIdentifier { id: "cosh_t", params: "t > 0", formula: "(1/cosh sqrt(2s))^t" },
            CatalogIdentifier { id: "tanh_t", params: "t > 0", formula: "(tanh sqrt(2s)/sqrt(2s))^t" },
            CatalogIdentifier { id: "zeta", params: "a > 1", formula: "zeta(a+s)/zeta(a)" },
            CatalogIdentifier {
                id: "scaled_sinh",
                params: "mu > 0",
                formula: "3 mu s/(sinh sqrt(3 mu s))^2",
            },
        ]
    }

    /// Exponential-with-atom entry from its atom mass and mean.
    pub fn exp_mixture_with_atom(p: f64, mu: f64) -> Result<Self> {
        CatalogEntry::ExpMixtureWithAtom {
            p,
            beta: (1.0 - p) / mu,
            mu: Some(mu),
        }
        .validated()
    }

    /// Checks parameter ranges and fills derived fields.
    pub fn validated(self) -> Result<Self> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::domain(format!("{name} must be positive and finite, got {v}")))
            }
        }
        match self {
            CatalogEntry::Degenerate { c } => {
                if !(c.is_finite() && c >= 0.0) {
                    return Err(Error::domain(format!("degenerate location must be >= 0, got {c}")));
                }
            }
            CatalogEntry::Exponential { mu } => positive("mu", mu)?,
            CatalogEntry::Gamma { a, b } => {
                positive("a", a)?;
                positive("b", b)?;
            }
            CatalogEntry::ExpMixtureWithAtom { p, beta, mu } => {
                if !(0.0..1.0).contains(&p) {
                    return Err(Error::domain(format!("atom mass p must lie in [0,1), got {p}")));
                }
                positive("beta", beta)?;
                let implied = (1.0 - p) / beta;
                if let Some(m) = mu {
                    positive("mu", m)?;
                    if (m - implied).abs() > 1e-12 * implied {
                        return Err(Error::domain(format!(
                            "mu = {m} inconsistent with (1-p)/beta = {implied}"
                        )));
                    }
                }
                return Ok(CatalogEntry::ExpMixtureWithAtom {
                    p,
                    beta,
                    mu: Some(mu.unwrap_or(implied)),
                });
            }
            CatalogEntry::TwoPoint { m1, m2 } => {
                positive("m1", m1)?;
                if !(m2.is_finite() && m2 >= m1 * m1) {
                    return Err(Error::domain(format!(
                        "two-point moments need m2 >= m1^2, got m1 = {m1}, m2 = {m2}"
                    )));
                }
            }
            CatalogEntry::SinhFamily { t }
            | CatalogEntry::CoshFamily { t }
            | CatalogEntry::TanhFamily { t } => positive("t", t)?,
            CatalogEntry::ZetaDist { a } => {
                zeta::zeta(a)?;
            }
            CatalogEntry::ScaledSinhSolution { mu } => positive("mu", mu)?,
        }
        Ok(self)
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        check_argument(s)?;
        let v = match *self {
            CatalogEntry::Degenerate { c } => (-c * s).exp(),
            CatalogEntry::Exponential { mu } => 1.0 / (1.0 + mu * s),
            CatalogEntry::Gamma { a, b } => (-a * (b * s).ln_1p()).exp(),
            CatalogEntry::ExpMixtureWithAtom { p, beta, .. } => p + (1.0 - p) / (1.0 + s / beta),
            CatalogEntry::TwoPoint { m1, m2 } => {
                let q = m1 * m1 / m2;
                1.0 - q + q * (-(m2 / m1) * s).exp()
            }
            CatalogEntry::SinhFamily { t } => (t * ln_x_over_sinh((2.0 * s).sqrt())).exp(),
            CatalogEntry::CoshFamily { t } => (-t * ln_cosh((2.0 * s).sqrt())).exp(),
            CatalogEntry::TanhFamily { t } => (t * ln_tanh_over_x((2.0 * s).sqrt())).exp(),
            CatalogEntry::ZetaDist { a } => zeta::zeta_transform(a, s)?,
            CatalogEntry::ScaledSinhSolution { mu } => {
                (2.0 * ln_x_over_sinh((3.0 * mu * s).sqrt())).exp()
            }
        };
        Ok(v)
    }

    /// `1 - F(s)`, evaluated without cancellation near `s = 0`.
    pub fn complement(&self, s: f64) -> Result<f64> {
        check_argument(s)?;
        let v = match *self {
            CatalogEntry::Degenerate { c } => -(-c * s).exp_m1(),
            CatalogEntry::Exponential { mu } => mu * s / (1.0 + mu * s),
            CatalogEntry::Gamma { a, b } => -(-a * (b * s).ln_1p()).exp_m1(),
            CatalogEntry::ExpMixtureWithAtom { p, beta, .. } => (1.0 - p) * s / (beta + s),
            CatalogEntry::TwoPoint { m1, m2 } => -(m1 * m1 / m2) * (-(m2 / m1) * s).exp_m1(),
            CatalogEntry::SinhFamily { t } => -(t * ln_x_over_sinh((2.0 * s).sqrt())).exp_m1(),
            CatalogEntry::CoshFamily { t } => -(-t * ln_cosh((2.0 * s).sqrt())).exp_m1(),
            CatalogEntry::TanhFamily { t } => -(t * ln_tanh_over_x((2.0 * s).sqrt())).exp_m1(),
            CatalogEntry::ZetaDist { a } => zeta::zeta_transform_complement(a, s)?,
            CatalogEntry::ScaledSinhSolution { mu } => {
                -(2.0 * ln_x_over_sinh((3.0 * mu * s).sqrt())).exp_m1()
            }
        };
        Ok(v)
    }

    pub fn mean(&self) -> f64 {
        match *self {
            CatalogEntry::Degenerate { c } => c,
            CatalogEntry::Exponential { mu } => mu,
            CatalogEntry::Gamma { a, b } => a * b,
            CatalogEntry::ExpMixtureWithAtom { p, beta, mu } => mu.unwrap_or((1.0 - p) / beta),
            CatalogEntry::TwoPoint { m1, .. } => m1,
            CatalogEntry::SinhFamily { t } => t / 3.0,
            CatalogEntry::CoshFamily { t } => t,
            CatalogEntry::TanhFamily { t } => 2.0 * t / 3.0,
            CatalogEntry::ZetaDist { a } => zeta::zeta_triple(a)
                .map(|z| z.distribution_mean())
                .unwrap_or(f64::NAN),
            CatalogEntry::ScaledSinhSolution { mu } => mu,
        }
    }

    pub fn second_moment(&self) -> f64 {
        match *self {
            CatalogEntry::Degenerate { c } => c * c,
            CatalogEntry::Exponential { mu } => 2.0 * mu * mu,
            CatalogEntry::Gamma { a, b } => a * (a + 1.0) * b * b,
            CatalogEntry::ExpMixtureWithAtom { p, beta, .. } => 2.0 * (1.0 - p) / (beta * beta),
            CatalogEntry::TwoPoint { m2, .. } => m2,
            CatalogEntry::SinhFamily { t } => 2.0 * t / 45.0 + t * t / 9.0,
            CatalogEntry::CoshFamily { t } => 2.0 * t / 3.0 + t * t,
            CatalogEntry::TanhFamily { t } => 28.0 * t / 45.0 + 4.0 * t * t / 9.0,
            CatalogEntry::ZetaDist { a } => zeta::zeta_triple(a)
                .map(|z| z.distribution_second_moment())
                .unwrap_or(f64::NAN),
            CatalogEntry::ScaledSinhSolution { mu } => 1.2 * mu * mu,
        }
    }
}

fn check_argument(s: f64) -> Result<()> {
    if s.is_nan() || s < 0.0 {
        return Err(Error::domain(format!("transform argument must be nonnegative, got {s}")));
    }
    Ok(())
}

/// `log(x / sinh x)` for `x >= 0`.
fn ln_x_over_sinh(x: f64) -> f64 {
    if x < SERIES_CUTOFF {
        let x2 = x * x;
        -(x2 / 6.0 + x2 * x2 / 120.0).ln_1p()
    } else if x < 20.0 {
        (x / x.sinh()).ln()
    } else {
        x.ln() - x + LN_2 - (-(-2.0 * x).exp()).ln_1p()
    }
}

/// `log cosh x` for `x >= 0`.
fn ln_cosh(x: f64) -> f64 {
    if x < 20.0 {
        let h = (0.5 * x).sinh();
        (2.0 * h * h).ln_1p()
    } else {
        x - LN_2 + (-2.0 * x).exp().ln_1p()
    }
}

/// `log(tanh x / x)` for `x >= 0`.
fn ln_tanh_over_x(x: f64) -> f64 {
    if x < SERIES_CUTOFF {
        let x2 = x * x;
        (-x2 / 3.0 + 2.0 * x2 * x2 / 15.0).ln_1p()
    } else {
        (x.tanh() / x).ln()
    }
}

/// An evaluable LS-transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Catalog(CatalogEntry),
    Grid(Arc<GridTransform>),
    /// Transform of the sum of two independent variables.
    Product(Box<Transform>, Box<Transform>),
    /// Transform of `factor · X`.
    Scaled { inner: Box<Transform>, factor: f64 },
    /// Equilibrium transform `(1 - F(s))/(mu s)`.
    Equilibrium(Box<Transform>),
}

impl From<CatalogEntry> for Transform {
    fn from(c: CatalogEntry) -> Self {
        Transform::Catalog(c)
    }
}

impl From<GridTransform> for Transform {
    fn from(g: GridTransform) -> Self {
        Transform::Grid(Arc::new(g))
    }
}

impl Transform {
    pub fn catalog(entry: CatalogEntry) -> Result<Self> {
        Ok(Transform::Catalog(entry.validated()?))
    }

    /// Transform of `factor · X`.
    pub fn scaled(inner: Transform, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::domain(format!("scale factor must be positive, got {factor}")));
        }
        Ok(Transform::Scaled {
            inner: Box::new(inner),
            factor,
        })
    }

    pub fn equilibrium(inner: Transform) -> Result<Self> {
        match inner.mean() {
            Some(m) if m > 0.0 => Ok(Transform::Equilibrium(Box::new(inner))),
            _ => Err(Error::Contract(
                "equilibrium transform needs a known positive mean".into(),
            )),
        }
    }

    /// `F(s)`; grid-backed transforms reject arguments outside their grid.
    pub fn eval(&self, s: f64) -> Result<f64> {
        check_argument(s)?;
        match self {
            Transform::Catalog(c) => c.eval(s),
            Transform::Grid(g) => g.eval(s),
            Transform::Product(a, b) => Ok(a.eval(s)? * b.eval(s)?),
            Transform::Scaled { inner, factor } => inner.eval(factor * s),
            Transform::Equilibrium(inner) => {
                let mu = inner
                    .mean()
                    .ok_or_else(|| Error::Contract("equilibrium of transform without mean".into()))?;
                if s == 0.0 {
                    return Ok(1.0);
                }
                let f = inner.eval(s)?;
                if mu * s < 1e-6 {
                    if let Some(m2) = inner.second_moment() {
                        // (1 - F)/(mu s) = 1 - m2 s/(2 mu) + O(s^2)
                        return Ok(1.0 - m2 * s / (2.0 * mu));
                    }
                }
                Ok(((1.0 - f) / (mu * s)).clamp(0.0, 1.0))
            }
        }
    }

    /// `1 - F(s)` with full relative precision where the representation allows.
    pub fn complement(&self, s: f64) -> Result<f64> {
        check_argument(s)?;
        match self {
            Transform::Catalog(c) => c.complement(s),
            Transform::Grid(g) => g.complement(s),
            Transform::Product(a, b) => {
                let (ca, cb) = (a.complement(s)?, b.complement(s)?);
                Ok(ca + cb - ca * cb)
            }
            Transform::Scaled { inner, factor } => inner.complement(factor * s),
            Transform::Equilibrium(_) => Ok(1.0 - self.eval(s)?),
        }
    }

    /// Known first moment, if any.
    pub fn mean(&self) -> Option<f64> {
        match self {
            Transform::Catalog(c) => Some(c.mean()),
            Transform::Grid(g) => g.mean(),
            Transform::Product(a, b) => Some(a.mean()? + b.mean()?),
            Transform::Scaled { inner, factor } => inner.mean().map(|m| m * factor),
            Transform::Equilibrium(inner) => {
                let m1 = inner.mean()?;
                Some(inner.second_moment()? / (2.0 * m1))
            }
        }
    }

    /// Known second moment, if any.
    pub fn second_moment(&self) -> Option<f64> {
        match self {
            Transform::Catalog(c) => Some(c.second_moment()),
            Transform::Grid(g) => g.second_moment(),
            Transform::Product(a, b) => {
                let (m1a, m1b) = (a.mean()?, b.mean()?);
                Some(a.second_moment()? + 2.0 * m1a * m1b + b.second_moment()?)
            }
            Transform::Scaled { inner, factor } => inner.second_moment().map(|m| m * factor * factor),
            Transform::Equilibrium(_) => None,
        }
    }

    /// Upper end of the arguments this transform accepts.
    pub fn domain_limit(&self) -> f64 {
        match self {
            Transform::Grid(g) => g.upper(),
            Transform::Product(a, b) => a.domain_limit().min(b.domain_limit()),
            Transform::Scaled { inner, factor } => inner.domain_limit() / factor,
            Transform::Equilibrium(inner) => inner.domain_limit(),
            Transform::Catalog(_) => f64::INFINITY,
        }
    }
}

/// Lemma-5 envelope: the two-point transform with moments `m1`, `m2`.
pub fn two_point_bound(m1: f64, m2: f64) -> Result<Transform> {
    if !(m1.is_finite() && m1 > 0.0) {
        return Err(Error::domain(format!("m1 must be positive, got {m1}")));
    }
    // admit round-off just below the zero-variance boundary
    let m2 = if m2 < m1 * m1 && m2 >= m1 * m1 * (1.0 - 1e-12) { m1 * m1 } else { m2 };
    Transform::catalog(CatalogEntry::TwoPoint { m1, m2 })
}

/// Pointwise product of two transforms.
pub fn product(a: Transform, b: Transform) -> Transform {
    Transform::Product(Box::new(a), Box::new(b))
}

/// Worst sign violation among the divided differences of one order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderDiagnostic {
    pub order: usize,
    /// Largest amount by which `(-1)^k Δ^k` fell below zero (0 if none).
    pub worst_violation: f64,
    /// Grid index where the worst violation starts.
    pub at_index: Option<usize>,
    pub passed: bool,
}

/// Finite-difference complete-monotonicity diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CmReport {
    pub tolerance: f64,
    pub orders: Vec<OrderDiagnostic>,
}

impl CmReport {
    pub fn passed(&self) -> bool {
        self.orders.iter().all(|o| o.passed)
    }

    pub fn first_violated_order(&self) -> Option<usize> {
        self.orders.iter().find(|o| !o.passed).map(|o| o.order)
    }
}

/// Relative tolerance used by [`check_complete_monotonicity`].
pub const CM_TOLERANCE: f64 = 1e-9;

/// Checks that divided differences of orders `1..=max_order` alternate in
/// sign as they must for a completely monotone function.
///
/// Each order-`k` divided difference is rescaled by the `k`-th power of its
/// stencil width, so it is compared on the scale of the sampled values;
/// violations larger than `CM_TOLERANCE · max|f|` are reported.
pub fn check_complete_monotonicity<F>(f: F, grid: &[f64], max_order: usize) -> Result<CmReport>
where
    F: Fn(f64) -> Result<f64>,
{
    if grid.len() < max_order + 1 {
        return Err(Error::domain(format!(
            "grid needs at least {} points for order {max_order}",
            max_order + 1
        )));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain("grid must be strictly increasing"));
    }
    let values = grid.iter().map(|&s| f(s)).collect::<Result<Vec<_>>>()?;
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let tolerance = CM_TOLERANCE * scale;

    let mut orders = Vec::with_capacity(max_order);
    let mut divided = values.clone();
    for k in 1..=max_order {
        divided = (0..divided.len() - 1)
            .map(|i| (divided[i + 1] - divided[i]) / (grid[i + k] - grid[i]))
            .collect();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let mut worst = 0.0;
        let mut at = None;
        for (i, d) in divided.iter().enumerate() {
            let width = grid[i + k] - grid[i];
            // k! f[x_i..x_{i+k}] width^k is the order-k difference on the value scale
            let factorial: f64 = (1..=k).map(|j| j as f64).product();
            let normalized = sign * d * factorial * width.powi(k as i32);
            if -normalized > worst {
                worst = -normalized;
                at = Some(i);
            }
        }
        orders.push(OrderDiagnostic {
            order: k,
            worst_violation: worst,
            at_index: at,
            passed: worst <= tolerance,
        });
    }
    Ok(CmReport { tolerance, orders })
}

/// `n` points geometrically spaced on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let ratio = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|i| lo * (ratio * i as f64).exp()).collect()
}
