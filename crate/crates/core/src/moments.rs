//! Moments recovered from transforms near `s = 0`, and the length-biased and
//! equilibrium constructions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::law::{length_biased_law, Law};
use crate::transforms::Transform;

/// Default first step `s0 = 1e-2 / scale`.
pub const RICHARDSON_START: f64 = 1e-2;
/// Default number of halvings.
pub const RICHARDSON_LEVELS: usize = 6;

/// Extrapolated limit with the tableau's own error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub value: f64,
    pub levels: usize,
    pub error_estimate: f64,
}

/// Richardson settings: samples at `s0 · 2^-k`, `k = 0..=levels`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Richardson {
    pub s0: f64,
    pub levels: usize,
}

impl Richardson {
    pub fn for_scale(scale: f64) -> Self {
        Richardson {
            s0: RICHARDSON_START / scale,
            levels: RICHARDSON_LEVELS,
        }
    }

    /// Limit as `s -> 0+` of `g(s)`, assuming an expansion in integer powers of `s`.
    pub fn limit<G>(&self, g: G) -> Result<MomentEstimate>
    where
        G: Fn(f64) -> Result<f64>,
    {
        if !(self.s0 > 0.0 && self.s0.is_finite()) || self.levels < 2 {
            return Err(Error::domain("Richardson needs s0 > 0 and at least 2 levels"));
        }
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(self.levels + 1);
        let mut best = MomentEstimate {
            value: f64::NAN,
            levels: 0,
            error_estimate: f64::INFINITY,
        };
        let mut growth = 0;
        let mut prev_err = f64::INFINITY;
        for k in 0..=self.levels {
            let h = self.s0 * 0.5f64.powi(k as i32);
            let base = g(h)?;
            if !base.is_finite() {
                return Err(Error::Numerical(format!("non-finite sample {base} at s = {h:e}")));
            }
            let mut row = vec![base];
            for j in 1..=k {
                let factor = 2f64.powi(j as i32) - 1.0;
                let prev = &rows[k - 1];
                let v = row[j - 1] + (row[j - 1] - prev[j - 1]) / factor;
                row.push(v);
            }
            if k >= 1 {
                let err = (row[k] - rows[k - 1][k - 1]).abs();
                if err < best.error_estimate {
                    best = MomentEstimate {
                        value: row[k],
                        levels: k + 1,
                        error_estimate: err,
                    };
                }
                growth = if err > prev_err { growth + 1 } else { 0 };
                prev_err = err;
                if growth >= 2 {
                    break;
                }
            }
            rows.push(row);
        }
        if growth >= 2 && best.error_estimate > 1e-6 * best.value.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::Numerical(format!(
                "Richardson tableau diverges: best error estimate {:e} at level {} for value {}",
                best.error_estimate, best.levels, best.value
            )));
        }
        Ok(best)
    }
}

fn scale_of(t: &Transform) -> f64 {
    t.mean().filter(|m| *m > 0.0 && m.is_finite()).unwrap_or(1.0)
}

/// `lim (1 - F(s))/s` as `s -> 0+`.
pub fn mean_from_transform(t: &Transform) -> Result<MomentEstimate> {
    mean_with(t, Richardson::for_scale(scale_of(t)))
}

pub fn mean_with(t: &Transform, r: Richardson) -> Result<MomentEstimate> {
    r.limit(|s| Ok((1.0 - t.eval(s)?) / s))
}

/// `2 lim (F(s) - 1 + mu s)/s^2` as `s -> 0+`.
pub fn second_moment_from_transform(t: &Transform, mu: f64) -> Result<MomentEstimate> {
    second_moment_with(t, mu, Richardson::for_scale(mu))
}

pub fn second_moment_with(t: &Transform, mu: f64, r: Richardson) -> Result<MomentEstimate> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::domain(format!("mean must be positive, got {mu}")));
    }
    let e = r.limit(|s| Ok((t.eval(s)? - 1.0 + mu * s) / (s * s)))?;
    Ok(MomentEstimate {
        value: 2.0 * e.value,
        error_estimate: 2.0 * e.error_estimate,
        ..e
    })
}

fn check_mean(d: &Law, mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::domain(format!("mean must lie in (0, inf), got {mu}")));
    }
    if let Some(m) = d.mean() {
        if (m - mu).abs() > 1e-8 * mu {
            return Err(Error::domain(format!("given mean {mu} differs from the law's mean {m}")));
        }
    }
    Ok(())
}

/// Law with density `z f(z) / mu`.
pub fn length_biased(d: &Law, mu: f64) -> Result<Law> {
    d.validate()?;
    check_mean(d, mu)?;
    length_biased_law(d)
}

/// Law with density `(1 - F(x)) / mu`.
pub fn equilibrium(d: &Law, mu: f64) -> Result<Law> {
    d.validate()?;
    check_mean(d, mu)?;
    let eq = match d {
        Law::Exponential { .. } => d.clone(),
        Law::Gamma { shape, scale } if *shape == 1.0 => Law::Exponential { mu: *scale },
        Law::ExpMixtureWithAtom { beta, .. } => Law::Exponential { mu: 1.0 / beta },
        Law::Degenerate { c } => {
            if *c == 0.0 {
                return Err(Error::domain("equilibrium law of the point mass at 0 is undefined"));
            }
            Law::Uniform { lo: 0.0, hi: *c }
        }
        Law::Uniform { lo, hi } if *lo == 0.0 => Law::Scaled {
            inner: Box::new(Law::beta_tail(2.0)),
            factor: *hi,
        },
        Law::Beta { a, b } if *a == 1.0 => Law::beta_tail(b + 1.0),
        Law::Scaled { inner, factor } => Law::Scaled {
            inner: Box::new(equilibrium(inner, inner.mean().unwrap_or(mu / factor))?),
            factor: *factor,
        },
        other => {
            // fails early when the length-biased law cannot be sampled
            length_biased_law(other)?;
            Law::Equilibrium { base: Box::new(other.clone()) }
        }
    };
    Ok(eq)
}

/// `k`-fold equilibrium law; needs a finite `k`-th moment.
pub fn equilibrium_iterate(d: &Law, k: usize) -> Result<Law> {
    d.validate()?;
    for j in 1..=k.max(1) {
        match d.moment(j as u32) {
            Some(m) if m.is_finite() => {}
            _ => {
                return Err(Error::domain(format!(
                    "equilibrium of order {k} needs a finite m_{j}"
                )))
            }
        }
    }
    let mut law = d.clone();
    for _ in 0..k {
        let mu = law
            .mean()
            .ok_or_else(|| Error::domain("intermediate equilibrium law has no known mean"))?;
        law = equilibrium(&law, mu)?;
    }
    Ok(law)
}

/// `m_k / (k m_{k-1})`, the mean of the order-`(k-1)` equilibrium law.
pub fn equilibrium_mean_prediction(d: &Law, k: u32) -> Option<f64> {
    if k == 0 {
        return None;
    }
    Some(d.moment(k)? / (k as f64 * d.moment(k - 1)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::{two_point_bound, CatalogEntry};
    use crate::zeta::zeta_triple;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn means_of_catalog_entries() {
        let e = Transform::from(CatalogEntry::Exponential { mu: 3.0 });
        assert!(rel(mean_from_transform(&e).unwrap().value, 3.0) < 1e-8);
        let tp = two_point_bound(1.0, 2.0).unwrap();
        assert!(rel(mean_from_transform(&tp).unwrap().value, 1.0) < 1e-8);
        let z = Transform::from(CatalogEntry::ZetaDist { a: 2.0 });
        let target = zeta_triple(2.0).unwrap().distribution_mean();
        assert!(rel(mean_from_transform(&z).unwrap().value, target) < 1e-7);
    }

    #[test]
    fn second_moments_of_catalog_entries() {
        let cases = [
            (CatalogEntry::Exponential { mu: 1.0 }, 1.0, 2.0),
            (CatalogEntry::Degenerate { c: 2.0 }, 2.0, 4.0),
            (CatalogEntry::Gamma { a: 2.0, b: 0.5 }, 1.0, 1.5),
        ];
        for (entry, mu, m2) in cases {
            let est = second_moment_from_transform(&entry.into(), mu).unwrap();
            assert!((est.value - m2).abs() < 1e-6, "{est:?}");
            assert!(est.levels >= 2 && est.error_estimate >= 0.0);
        }
    }

    #[test]
    fn every_catalog_mean_is_recovered() {
        let entries = [
            CatalogEntry::Gamma { a: 3.0, b: 0.2 },
            CatalogEntry::exp_mixture_with_atom(0.4, 1.5).unwrap(),
            CatalogEntry::SinhFamily { t: 2.0 },
            CatalogEntry::CoshFamily { t: 1.0 },
            CatalogEntry::TanhFamily { t: 5.0 },
            CatalogEntry::ScaledSinhSolution { mu: 2.0 / 3.0 },
        ];
        for e in entries {
            let mu = e.mean();
            let got = mean_from_transform(&e.clone().into()).unwrap().value;
            assert!(rel(got, mu) < 1e-8, "{e:?}: {got} vs {mu}");
        }
    }

    #[test]
    fn wrong_mean_makes_second_moment_diverge() {
        let e = Transform::from(CatalogEntry::Exponential { mu: 1.0 });
        assert!(matches!(second_moment_from_transform(&e, 1.1), Err(Error::Numerical(_))));
    }

    #[test]
    fn length_biased_examples() {
        assert_eq!(
            length_biased(&Law::Exponential { mu: 2.0 }, 2.0).unwrap(),
            Law::Gamma { shape: 2.0, scale: 2.0 }
        );
        assert_eq!(length_biased(&Law::Degenerate { c: 3.0 }, 3.0).unwrap(), Law::Degenerate { c: 3.0 });
        let mix = Law::exp_mixture(0.5, 1.0);
        assert_eq!(length_biased(&mix, 1.0).unwrap(), Law::Gamma { shape: 2.0, scale: 2.0 });
        assert!(length_biased(&Law::Exponential { mu: 2.0 }, 0.0).is_err());
        assert!(length_biased(&Law::Exponential { mu: 2.0 }, 1.0).is_err());
    }

    #[test]
    fn length_biased_mean_is_size_bias_ratio() {
        let laws = [
            Law::Exponential { mu: 1.5 },
            Law::Gamma { shape: 3.0, scale: 0.5 },
            Law::Uniform { lo: 0.0, hi: 2.0 },
            Law::beta_tail(2.0),
            Law::Power { k: 2.0 },
            Law::Example2d,
        ];
        for d in laws {
            let mu = d.mean().unwrap();
            let lb = length_biased(&d, mu).unwrap();
            let expected = d.moment(2).unwrap() / mu;
            assert!(rel(lb.mean().unwrap(), expected) < 1e-12, "{d:?}");
            if let Some(t) = lb.transform() {
                assert!(rel(mean_from_transform(&t).unwrap().value, expected) < 1e-6);
            }
        }
    }

    #[test]
    fn equilibrium_examples() {
        assert_eq!(
            equilibrium(&Law::Exponential { mu: 1.0 }, 1.0).unwrap(),
            Law::Exponential { mu: 1.0 }
        );
        let u = equilibrium(&Law::Uniform { lo: 0.0, hi: 1.0 }, 0.5).unwrap();
        // density 2(1-x): moments 1/3 and 1/6
        assert!(rel(u.moment(1).unwrap(), 1.0 / 3.0) < 1e-14);
        assert!(rel(u.moment(2).unwrap(), 1.0 / 6.0) < 1e-14);
    }

    #[test]
    fn equilibrium_transform_identity() {
        let base = Transform::from(CatalogEntry::Gamma { a: 2.0, b: 0.5 });
        let eq = Transform::equilibrium(base.clone()).unwrap();
        for s in [1e-3, 0.1, 1.0, 10.0] {
            let v = eq.eval(s).unwrap();
            assert!(v > 0.0 && v <= 1.0);
            assert!((v - (1.0 - base.eval(s).unwrap()) / s).abs() < 1e-14);
        }
        let law = equilibrium(&Law::Exponential { mu: 2.0 }, 2.0).unwrap();
        let closed = law.transform().unwrap();
        let via = Transform::equilibrium(CatalogEntry::Exponential { mu: 2.0 }.into()).unwrap();
        for s in [0.01, 0.5, 3.0] {
            assert!((closed.eval(s).unwrap() - via.eval(s).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn equilibrium_mean_identity() {
        let laws = [
            Law::Exponential { mu: 1.0 },
            Law::Gamma { shape: 2.5, scale: 0.7 },
            Law::Uniform { lo: 0.0, hi: 1.0 },
        ];
        for d in laws {
            for k in 1..=3u32 {
                let it = equilibrium_iterate(&d, (k - 1) as usize).unwrap();
                let predicted = equilibrium_mean_prediction(&d, k).unwrap();
                assert!(rel(it.mean().unwrap(), predicted) < 1e-6, "{d:?} k={k}");
            }
        }
        // exponential: every order has mean 1
        for k in 1..=3 {
            assert!(rel(equilibrium_mean_prediction(&Law::Exponential { mu: 1.0 }, k).unwrap(), 1.0) < 1e-15);
        }
    }

    #[test]
    fn insufficient_moments_name_the_order() {
        let p = Law::Pareto { alpha: 1.5, scale: 1.0 };
        match equilibrium_iterate(&p, 2) {
            Err(Error::Domain(msg)) => assert!(msg.contains("m_2"), "{msg}"),
            other => panic!("expected domain error, got {other:?}"),
        }
    }
}
