//! Sampleable nonnegative laws with analytic moments where available.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Beta, Distribution, Exp1, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixing::MixingLaw;
use crate::transforms::{CatalogEntry, Transform};
use crate::zeta::zeta;

/// Random stream handed to samplers.
pub type Stream = ChaCha12Rng;

/// Independent stream for one `(role, chunk)` pair under a seed.
pub fn stream(seed: u64, role: u64, chunk: u64) -> Stream {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream((role << 40) | chunk);
    rng
}

/// Which Gamma series a hyperbolic law is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hyperbolic {
    /// `S_t = (2/pi^2) sum Gamma_n / n^2`
    Sinh,
    /// `C_t = (2/pi^2) sum Gamma_n / (n - 1/2)^2`
    Cosh,
}

/// Number of Gamma terms drawn explicitly; the remainder is replaced by its mean.
const SERIES_TERMS: usize = 100;
/// Length of the table used to pick the size-biased series index.
const INDEX_TABLE: usize = 10_000;

impl Hyperbolic {
    fn offset(self) -> f64 {
        match self {
            Hyperbolic::Sinh => 0.0,
            Hyperbolic::Cosh => 0.5,
        }
    }

    /// `sum_n 1/(n - offset)^{2k}`.
    fn power_sum(self, k: u32) -> f64 {
        let z = zeta(2.0 * k as f64).expect("argument >= 2");
        match self {
            Hyperbolic::Sinh => z,
            Hyperbolic::Cosh => (4f64.powi(k as i32) - 1.0) * z,
        }
    }

    fn weight(self, n: usize) -> f64 {
        let d = n as f64 - self.offset();
        2.0 / (PI * PI * d * d)
    }

    fn tail_weight(self) -> f64 {
        let head: f64 = (1..=SERIES_TERMS).map(|n| self.weight(n)).sum();
        2.0 / (PI * PI) * self.power_sum(1) - head
    }

    fn index_cdf(self) -> &'static [f64] {
        static SINH: OnceLock<Vec<f64>> = OnceLock::new();
        static COSH: OnceLock<Vec<f64>> = OnceLock::new();
        let cell = match self {
            Hyperbolic::Sinh => &SINH,
            Hyperbolic::Cosh => &COSH,
        };
        cell.get_or_init(|| {
            let total = 2.0 / (PI * PI) * self.power_sum(1);
            let mut acc = 0.0;
            (1..=INDEX_TABLE)
                .map(|n| {
                    acc += self.weight(n) / total;
                    acc
                })
                .collect()
        })
    }

    /// Index `J` with `P(J = n)` proportional to the mean of term `n`.
    fn biased_index(self, rng: &mut Stream) -> f64 {
        let cdf = self.index_cdf();
        let u: f64 = rng.random();
        let i = cdf.partition_point(|c| *c < u);
        if i < cdf.len() {
            (i + 1) as f64
        } else {
            // continuous approximation of the far tail, P(J > m) ~ c/(m - offset)
            let last = *cdf.last().expect("non-empty");
            let m = INDEX_TABLE as f64 - self.offset();
            let v = ((u - last) / (1.0 - last)).min(1.0 - 1e-16);
            m / (1.0 - v) + self.offset()
        }
    }

    fn sample(self, t: f64, rng: &mut Stream) -> f64 {
        let gamma = Gamma::new(t, 1.0).expect("positive shape");
        let mut total = 0.0;
        for n in (1..=SERIES_TERMS).rev() {
            total += self.weight(n) * gamma.sample(rng);
        }
        total + t * self.tail_weight()
    }

    /// Cumulant `k` of the unit-scale law with parameter `t`.
    fn cumulant(self, t: f64, k: u32) -> f64 {
        let c = 2.0 / (PI * PI);
        let fact: f64 = (1..k).map(|j| j as f64).product();
        t * fact * c.powi(k as i32) * self.power_sum(k)
    }
}

/// A nonnegative law that can be sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    Degenerate { c: f64 },
    Exponential { mu: f64 },
    Gamma { shape: f64, scale: f64 },
    /// Atom `p` at zero, otherwise exponential with rate `beta`.
    ExpMixtureWithAtom { p: f64, beta: f64 },
    Uniform { lo: f64, hi: f64 },
    Beta { a: f64, b: f64 },
    /// Density `1/sqrt(t) - 1` on `(0, 1)`.
    Example2d,
    /// `U^k` for `U` uniform on `[0, 1]`.
    Power { k: f64 },
    /// Pareto with tail index `alpha` on `[scale, inf)`.
    Pareto { alpha: f64, scale: f64 },
    /// `scale` times the `S_t` or `C_t` law.
    Hyperbolic { kind: Hyperbolic, t: f64, scale: f64 },
    /// Length-biased version of a hyperbolic law.
    SizeBiasedHyperbolic { kind: Hyperbolic, t: f64, scale: f64 },
    Scaled { inner: Box<Law>, factor: f64 },
    /// Product of two independent draws.
    Product { left: Box<Law>, right: Box<Law> },
    /// Length-biased law sampled by rejection from `base`.
    LengthBiased { base: Box<Law> },
    /// Equilibrium law, sampled as `U` times the length-biased law.
    Equilibrium { base: Box<Law> },
}

fn falling_gamma_ratio(shape: f64, k: u32) -> f64 {
    (0..k).map(|j| shape + j as f64).product()
}

impl Law {
    /// `F(x) = 1 - (1-x)^a` on `(0, 1)`, i.e. Beta(1, a).
    pub fn beta_tail(a: f64) -> Law {
        Law::Beta { a: 1.0, b: a }
    }

    /// `(mu/2) C_2`, whose transform is `(1/cosh sqrt(mu s))^2`.
    pub fn cosh_squared(mu: f64) -> Law {
        Law::Hyperbolic {
            kind: Hyperbolic::Cosh,
            t: 2.0,
            scale: mu / 2.0,
        }
    }

    /// Mixture law `p + (1-p)(1 - e^{-beta x})` with mean `mu`.
    pub fn exp_mixture(p: f64, mu: f64) -> Law {
        Law::ExpMixtureWithAtom { p, beta: (1.0 - p) / mu }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64, what: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::domain(format!("{what} must be positive, got {v}")))
            }
        };
        match self {
            Law::Degenerate { c } => {
                if !(c.is_finite() && *c >= 0.0) {
                    return Err(Error::domain(format!("degenerate location must be >= 0, got {c}")));
                }
            }
            Law::Exponential { mu } => pos(*mu, "mu")?,
            Law::Gamma { shape, scale } => {
                pos(*shape, "shape")?;
                pos(*scale, "scale")?;
            }
            Law::ExpMixtureWithAtom { p, beta } => {
                if !(0.0..1.0).contains(p) {
                    return Err(Error::domain(format!("p must lie in [0, 1), got {p}")));
                }
                pos(*beta, "beta")?;
            }
            Law::Uniform { lo, hi } => {
                if !(*lo >= 0.0 && hi > lo && hi.is_finite()) {
                    return Err(Error::domain(format!("uniform needs 0 <= lo < hi, got [{lo}, {hi}]")));
                }
            }
            Law::Beta { a, b } => {
                pos(*a, "a")?;
                pos(*b, "b")?;
            }
            Law::Example2d => {}
            Law::Power { k } => pos(*k, "k")?,
            Law::Pareto { alpha, scale } => {
                pos(*alpha, "alpha")?;
                pos(*scale, "scale")?;
            }
            Law::Hyperbolic { t, scale, .. } | Law::SizeBiasedHyperbolic { t, scale, .. } => {
                pos(*t, "t")?;
                pos(*scale, "scale")?;
            }
            Law::Scaled { inner, factor } => {
                pos(*factor, "factor")?;
                inner.validate()?;
            }
            Law::Product { left, right } => {
                left.validate()?;
                right.validate()?;
            }
            Law::LengthBiased { base } | Law::Equilibrium { base } => base.validate()?,
        }
        Ok(())
    }

    /// `E[X^k]`, or `None` when infinite or not available in closed form.
    pub fn moment(&self, k: u32) -> Option<f64> {
        if k == 0 {
            return Some(1.0);
        }
        let kf = k as f64;
        let factorial: f64 = (1..=k).map(|j| j as f64).product();
        let v = match self {
            Law::Degenerate { c } => c.powi(k as i32),
            Law::Exponential { mu } => factorial * mu.powi(k as i32),
            Law::Gamma { shape, scale } => falling_gamma_ratio(*shape, k) * scale.powi(k as i32),
            Law::ExpMixtureWithAtom { p, beta } => (1.0 - p) * factorial / beta.powi(k as i32),
            Law::Uniform { lo, hi } => (hi.powi(k as i32 + 1) - lo.powi(k as i32 + 1)) / ((kf + 1.0) * (hi - lo)),
            Law::Beta { a, b } => (0..k).map(|j| (a + j as f64) / (a + b + j as f64)).product(),
            Law::Example2d => 1.0 / (kf + 0.5) - 1.0 / (kf + 1.0),
            Law::Power { k: e } => 1.0 / (e * kf + 1.0),
            Law::Pareto { alpha, scale } => {
                if *alpha <= kf {
                    return None;
                }
                alpha * scale.powi(k as i32) / (alpha - kf)
            }
            Law::Hyperbolic { kind, t, scale } => {
                if k > 4 {
                    return None;
                }
                let c: Vec<f64> = (1..=k).map(|j| kind.cumulant(*t, j)).collect();
                let m = match k {
                    1 => c[0],
                    2 => c[1] + c[0] * c[0],
                    3 => c[2] + 3.0 * c[1] * c[0] + c[0].powi(3),
                    _ => c[3] + 4.0 * c[2] * c[0] + 3.0 * c[1] * c[1] + 6.0 * c[1] * c[0] * c[0] + c[0].powi(4),
                };
                m * scale.powi(k as i32)
            }
            Law::SizeBiasedHyperbolic { kind, t, scale } => {
                let base = Law::Hyperbolic { kind: *kind, t: *t, scale: *scale };
                base.moment(k + 1)? / base.moment(1)?
            }
            Law::Scaled { inner, factor } => inner.moment(k)? * factor.powi(k as i32),
            Law::Product { left, right } => left.moment(k)? * right.moment(k)?,
            Law::LengthBiased { base } => base.moment(k + 1)? / base.moment(1)?,
            Law::Equilibrium { base } => base.moment(k + 1)? / ((kf + 1.0) * base.moment(1)?),
        };
        v.is_finite().then_some(v)
    }

    pub fn mean(&self) -> Option<f64> {
        self.moment(1)
    }

    /// Upper end of the support, when bounded.
    pub fn support_max(&self) -> Option<f64> {
        match self {
            Law::Degenerate { c } => Some(*c),
            Law::Uniform { hi, .. } => Some(*hi),
            Law::Beta { .. } | Law::Example2d | Law::Power { .. } => Some(1.0),
            Law::Scaled { inner, factor } => inner.support_max().map(|m| m * factor),
            Law::Product { left, right } => Some(left.support_max()? * right.support_max()?),
            Law::LengthBiased { base } | Law::Equilibrium { base } => base.support_max(),
            _ => None,
        }
    }

    /// Closed-form LS-transform, when one exists in the catalog.
    pub fn transform(&self) -> Option<Transform> {
        let t = match self {
            Law::Degenerate { c } => CatalogEntry::Degenerate { c: *c }.into(),
            Law::Exponential { mu } => CatalogEntry::Exponential { mu: *mu }.into(),
            Law::Gamma { shape, scale } => CatalogEntry::Gamma { a: *shape, b: *scale }.into(),
            Law::ExpMixtureWithAtom { p, beta } => CatalogEntry::ExpMixtureWithAtom {
                p: *p,
                beta: *beta,
                mu: Some((1.0 - p) / beta),
            }
            .into(),
            Law::Hyperbolic { kind, t, scale } => {
                let entry = match kind {
                    Hyperbolic::Sinh => CatalogEntry::SinhFamily { t: *t },
                    Hyperbolic::Cosh => CatalogEntry::CoshFamily { t: *t },
                };
                Transform::scaled(entry.into(), *scale).ok()?
            }
            Law::Scaled { inner, factor } => Transform::scaled(inner.transform()?, *factor).ok()?,
            Law::Equilibrium { base } => Transform::equilibrium(base.transform()?).ok()?,
            _ => return None,
        };
        Some(t)
    }

    /// One draw.
    pub fn sample(&self, rng: &mut Stream) -> f64 {
        match self {
            Law::Degenerate { c } => *c,
            Law::Exponential { mu } => mu * <Exp1 as Distribution<f64>>::sample(&Exp1, rng),
            Law::Gamma { shape, scale } => Gamma::new(*shape, *scale).expect("validated").sample(rng),
            Law::ExpMixtureWithAtom { p, beta } => {
                let u: f64 = rng.random();
                if u < *p {
                    0.0
                } else {
                    <Exp1 as Distribution<f64>>::sample(&Exp1, rng) / beta
                }
            }
            Law::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            Law::Beta { a, b } => {
                if *a == 1.0 {
                    // inverse CDF of 1 - (1-x)^b
                    let u: f64 = rng.random();
                    1.0 - (1.0 - u).powf(1.0 / b)
                } else {
                    Beta::new(*a, *b).expect("validated").sample(rng)
                }
            }
            Law::Example2d => {
                // t = u^2 where u has density 2(1-u)
                let v: f64 = rng.random();
                let u = 1.0 - (1.0 - v).sqrt();
                u * u
            }
            Law::Power { k } => rng.random::<f64>().powf(*k),
            Law::Pareto { alpha, scale } => scale * (1.0 - rng.random::<f64>()).powf(-1.0 / alpha),
            Law::Hyperbolic { kind, t, scale } => scale * kind.sample(*t, rng),
            Law::SizeBiasedHyperbolic { kind, t, scale } => {
                // size-biasing one Gamma(t) term turns it into Gamma(t) + Exp(1)
                let j = kind.biased_index(rng);
                let d = j - kind.offset();
                let extra = 2.0 / (PI * PI * d * d) * <Exp1 as Distribution<f64>>::sample(&Exp1, rng);
                scale * (kind.sample(*t, rng) + extra)
            }
            Law::Scaled { inner, factor } => factor * inner.sample(rng),
            Law::Product { left, right } => left.sample(rng) * right.sample(rng),
            Law::LengthBiased { base } => {
                let top = base.support_max().expect("checked at construction");
                loop {
                    let x = base.sample(rng);
                    if rng.random::<f64>() * top < x {
                        return x;
                    }
                }
            }
            Law::Equilibrium { base } => {
                let u: f64 = rng.random();
                let z = length_biased_law(base).expect("checked at construction").sample(rng);
                u * z
            }
        }
    }

    /// `n` draws.
    pub fn sample_n(&self, n: usize, rng: &mut Stream) -> Vec<f64> {
        (0..n).map(|_| self.sample(rng)).collect()
    }
}

/// Closed-form length-biased law, falling back to rejection on bounded support.
pub(crate) fn length_biased_law(d: &Law) -> Result<Law> {
    let lb = match d {
        Law::Degenerate { .. } => d.clone(),
        Law::Exponential { mu } => Law::Gamma { shape: 2.0, scale: *mu },
        Law::Gamma { shape, scale } => Law::Gamma { shape: shape + 1.0, scale: *scale },
        Law::ExpMixtureWithAtom { beta, .. } => Law::Gamma { shape: 2.0, scale: 1.0 / beta },
        Law::Uniform { lo, hi } if *lo == 0.0 => Law::Scaled {
            inner: Box::new(Law::Power { k: 0.5 }),
            factor: *hi,
        },
        Law::Beta { a, b } => Law::Beta { a: a + 1.0, b: *b },
        Law::Power { k } => Law::Power { k: k / (k + 1.0) },
        Law::Pareto { alpha, scale } if *alpha > 1.0 => Law::Pareto { alpha: alpha - 1.0, scale: *scale },
        Law::Hyperbolic { kind, t, scale } => Law::SizeBiasedHyperbolic { kind: *kind, t: *t, scale: *scale },
        Law::Scaled { inner, factor } => Law::Scaled {
            inner: Box::new(length_biased_law(inner)?),
            factor: *factor,
        },
        Law::Product { left, right } => Law::Product {
            left: Box::new(length_biased_law(left)?),
            right: Box::new(length_biased_law(right)?),
        },
        // the equilibrium law is U times LB(base)
        Law::Equilibrium { base } => Law::Product {
            left: Box::new(Law::Power { k: 0.5 }),
            right: Box::new(length_biased_law(&length_biased_law(base)?)?),
        },
        other => {
            if other.support_max().is_none() {
                return Err(Error::capability(
                    "moments",
                    format!("length-biased sampling of {other:?} needs bounded support"),
                ));
            }
            Law::LengthBiased { base: Box::new(other.clone()) }
        }
    };
    Ok(lb)
}

impl TryFrom<&MixingLaw> for Law {
    type Error = Error;

    fn try_from(m: &MixingLaw) -> Result<Law> {
        let law = match *m {
            MixingLaw::Atom(loc, mass) => {
                if mass != 1.0 {
                    return Err(Error::domain(format!("a single atom law needs mass 1, got {mass}")));
                }
                Law::Degenerate { c: loc }
            }
            MixingLaw::Uniform(lo, hi) => {
                if lo == hi {
                    Law::Degenerate { c: lo }
                } else {
                    Law::Uniform { lo, hi }
                }
            }
            MixingLaw::BetaTail(a) => Law::beta_tail(a),
            MixingLaw::Example2d => Law::Example2d,
            MixingLaw::USquared => Law::Power { k: 2.0 },
            MixingLaw::Exp(mu) => Law::Exponential { mu },
            MixingLaw::Atoms(_) => {
                return Err(Error::capability("simulate", "sampling from a multi-atom law"));
            }
        };
        law.validate()?;
        Ok(law)
    }
}
