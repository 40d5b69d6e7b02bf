use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Equation families and their presets, with the scalar constants each needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    /// `F(s) = E_A[exp(-A σ_B(σ(s)))]`
    #[serde(rename = "theorem1")]
    PowerMixtureExp,
    /// `F(s) = E_A[(1 + λ σ_B(σ(s)))^{-A}]` with constant `λ`.
    #[serde(rename = "theorem2")]
    ParetoMixA { lambda: f64 },
    /// `F(s) = E_Λ[(1 + Λ σ_B(σ(s)))^{-a}]` with constant `a`.
    #[serde(rename = "theorem3")]
    ParetoMixLambda { a: f64 },
    /// `F(s) = E[(1 + Λ σ_B(σ(s)))^{-A}]` with `A`, `Λ` independent.
    #[serde(rename = "theorem4")]
    ParetoMixBoth,
    /// `F(s) = E_Λ[ζ(a + Λ σ(s))] / ζ(a)`.
    #[serde(rename = "theorem5")]
    ZetaFamily { a: f64 },
    /// `F = 1/(1 + σ)`: power mixture with `A ~ Exp(1)`, `B = 0`.
    CompoundExponential,
    /// `F = exp(-σ)`: power mixture with `A = 1`, `B = 0`.
    CompoundPoisson,
    /// Power mixture with `B = 0`.
    Corollary1,
    /// Power mixture with `T = p`, `B = 0`.
    Corollary4 { p: f64 },
    /// `F = exp(-σ*)`; only residual checks are supported.
    SigmaStar,
}

impl Family {
    pub const IDS: [&'static str; 10] = [
        "theorem1",
        "theorem2",
        "theorem3",
        "theorem4",
        "theorem5",
        "compound_exponential",
        "compound_poisson",
        "corollary1",
        "corollary4",
        "sigma_star",
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Family::PowerMixtureExp => "theorem1",
            Family::ParetoMixA { .. } => "theorem2",
            Family::ParetoMixLambda { .. } => "theorem3",
            Family::ParetoMixBoth => "theorem4",
            Family::ZetaFamily { .. } => "theorem5",
            Family::CompoundExponential => "compound_exponential",
            Family::CompoundPoisson => "compound_poisson",
            Family::Corollary1 => "corollary1",
            Family::Corollary4 { .. } => "corollary4",
            Family::SigmaStar => "sigma_star",
        }
    }

    /// Builds a family from its id and whichever constants it needs.
    pub fn from_id(id: &str, lambda: Option<f64>, a: Option<f64>, p: Option<f64>) -> Result<Family> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::config(format!("family.{name}"), format!("family `{id}` needs `{name}`")))
        };
        let f = match id {
            "theorem1" => Family::PowerMixtureExp,
            "theorem2" => Family::ParetoMixA { lambda: need(lambda, "lambda")? },
            "theorem3" => Family::ParetoMixLambda { a: need(a, "a")? },
            "theorem4" => Family::ParetoMixBoth,
            "theorem5" => Family::ZetaFamily { a: need(a, "a")? },
            "compound_exponential" => Family::CompoundExponential,
            "compound_poisson" => Family::CompoundPoisson,
            "corollary1" => Family::Corollary1,
            "corollary4" => Family::Corollary4 { p: need(p, "p")? },
            "sigma_star" => Family::SigmaStar,
            other => {
                return Err(Error::config(
                    "family.id",
                    format!("unknown family `{other}`; known: {}", Family::IDS.join(", ")),
                ))
            }
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name: &str, v: f64, range: &str| {
            Err(Error::config(format!("family.{name}"), format!("{name} = {v} must be {range}")))
        };
        match *self {
            Family::ParetoMixA { lambda } if !(lambda.is_finite() && lambda > 0.0) => bad("lambda", lambda, "> 0"),
            Family::ParetoMixLambda { a } if !(a.is_finite() && a > 0.0) => bad("a", a, "> 0"),
            Family::ZetaFamily { a } if !(a.is_finite() && a > 1.0 + 1e-6) => bad("a", a, "> 1"),
            Family::Corollary4 { p } if !(0.0..1.0).contains(&p) => bad("p", p, "in [0, 1)"),
            _ => Ok(()),
        }
    }

    /// Whether the family is a preset of the power-mixture family.
    pub fn is_power_mixture(&self) -> bool {
        matches!(
            self,
            Family::PowerMixtureExp
                | Family::CompoundExponential
                | Family::CompoundPoisson
                | Family::Corollary1
                | Family::Corollary4 { .. }
        )
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Family {
    type Err = Error;

    /// Parses ids of families without constants.
    fn from_str(s: &str) -> Result<Family> {
        Family::from_id(s, None, None, None)
    }
}

/// Moments of the mixing laws that enter the variance formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LawMoments {
    pub mu: f64,
    pub et: f64,
    pub ea: f64,
    pub ea2: f64,
    pub eb: f64,
    pub el: f64,
    pub el2: f64,
}

impl Family {
    /// Closed-form variance of the solution, evaluated family by family.
    pub fn variance_formula(&self, m: &LawMoments) -> Result<f64> {
        let mu2 = m.mu * m.mu;
        let denom = 1.0 - m.et;
        let var_a = m.ea2 - m.ea * m.ea;
        let v = match *self {
            Family::PowerMixtureExp => (var_a + m.eb + m.et) / denom,
            Family::Corollary1 | Family::Corollary4 { .. } => (var_a + m.et) / denom,
            Family::CompoundPoisson => m.et / denom,
            Family::CompoundExponential => (1.0 + m.et) / denom,
            Family::ParetoMixA { lambda } => (lambda * lambda * var_a + lambda + m.eb + m.et) / denom,
            Family::ParetoMixLambda { a } => {
                let var_l = m.el2 - m.el * m.el;
                (a * a * var_l + a * m.el2 + m.eb + m.et) / denom
            }
            Family::ParetoMixBoth => (m.ea2 * m.el2 - 1.0 + m.ea * m.el2 + m.eb + m.et) / denom,
            Family::ZetaFamily { a } => {
                let z = crate::zeta::zeta_triple(a)?;
                (z.d2zeta * m.el2 - z.zeta + z.zeta * m.et) / (z.zeta * denom)
            }
            Family::SigmaStar => {
                return Err(Error::capability("solver", "no variance formula for the σ* equation"));
            }
        };
        Ok(v * mu2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in Family::IDS {
            let f = Family::from_id(id, Some(2.0), Some(2.0), Some(0.5)).unwrap();
            assert_eq!(f.id(), id);
            let json = serde_json::to_string(&f).unwrap();
            assert_eq!(serde_json::from_str::<Family>(&json).unwrap(), f);
        }
        assert!(Family::from_id("theorem9", None, None, None).is_err());
        assert!(Family::from_id("theorem5", None, Some(1.0), None).is_err());
        assert!("theorem2".parse::<Family>().is_err());
    }

    #[test]
    fn corollary_variances() {
        let m = LawMoments { mu: 1.0, et: 0.5, ea: 1.0, ea2: 2.0, eb: 0.0, el: 0.0, el2: 0.0 };
        // compound exponential with E[T] = 1/2 has variance 3 mu^2
        assert!((Family::CompoundExponential.variance_formula(&m).unwrap() - 3.0).abs() < 1e-15);
        // it is the power mixture with A ~ Exp(1)
        assert!((Family::PowerMixtureExp.variance_formula(&m).unwrap() - 3.0).abs() < 1e-15);
        let deg = LawMoments { et: 0.0, ea2: 1.0, ..m };
        assert_eq!(Family::CompoundPoisson.variance_formula(&deg).unwrap(), 0.0);
    }

    #[test]
    fn theorem4_reduces_to_theorems_2_and_3() {
        let lambda = 2.0;
        // A two-point with mean 1/λ; Λ = λ
        let m = LawMoments { mu: 1.3, et: 0.2, ea: 0.5, ea2: 0.4, eb: 0.7, el: lambda, el2: lambda * lambda };
        let both = Family::ParetoMixBoth.variance_formula(&m).unwrap();
        let a_only = Family::ParetoMixA { lambda }.variance_formula(&m).unwrap();
        assert!((both - a_only).abs() < 1e-13);
        let a = 3.0;
        let m = LawMoments { ea: a, ea2: a * a, el: 1.0 / a, el2: 0.2, ..m };
        let both = Family::ParetoMixBoth.variance_formula(&m).unwrap();
        let l_only = Family::ParetoMixLambda { a }.variance_formula(&m).unwrap();
        assert!((both - l_only).abs() < 1e-13);
    }
}
