use serde::{Deserialize, Serialize};

use super::family::{Family, LawMoments};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::mixing::{sigma_b, MixingDistribution, MixingLaw};
use crate::zeta::{zeta, zeta_drop, zeta_triple};

/// Iteration controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    /// Sup-norm change between iterates that counts as converged.
    pub tol: f64,
    pub max_iters: usize,
    /// Allowed ascent of an iterate over its predecessor at any node.
    pub tau_mono: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tol: 1e-10,
            max_iters: 500,
            tau_mono: 1e-9,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::config("solver.tol", format!("must be positive, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::config("solver.max_iters", "must be at least 1"));
        }
        if !(self.tau_mono >= 0.0 && self.tau_mono.is_finite()) {
            return Err(Error::config("solver.tau_mono", format!("must be >= 0, got {}", self.tau_mono)));
        }
        Ok(())
    }
}

/// Grid overrides; unset fields take the defaults for the problem's mean.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
}

impl GridConfig {
    pub fn resolve(&self, mu: f64, t_max: f64) -> Result<GridSpec> {
        let d = GridSpec::for_mean(mu);
        let spec = GridSpec {
            s_min: self.s_min.unwrap_or(d.s_min),
            s_max: self.s_max.unwrap_or(d.s_max),
            nodes: self.nodes.unwrap_or(d.nodes),
            t_max,
        };
        spec.validate().map_err(|e| Error::config("problem.grid", e.to_string()))?;
        Ok(spec)
    }

    /// The same overrides with every field filled in.
    pub fn filled(spec: &GridSpec) -> Self {
        GridConfig {
            s_min: Some(spec.s_min),
            s_max: Some(spec.s_max),
            nodes: Some(spec.nodes),
        }
    }
}

/// Serializable problem description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub family: Family,
    pub mu: f64,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub t: Option<MixingLaw>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<MixingLaw>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<MixingLaw>,
    #[serde(rename = "Lambda", default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<MixingLaw>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverSettings,
}

impl ProblemSpec {
    pub fn new(family: Family, mu: f64) -> Self {
        ProblemSpec {
            family,
            mu,
            t: None,
            a: None,
            b: None,
            lambda: None,
            grid: GridConfig::default(),
            solver: SolverSettings::default(),
        }
    }

    pub fn with_t(mut self, law: MixingLaw) -> Self {
        self.t = Some(law);
        self
    }

    pub fn with_a(mut self, law: MixingLaw) -> Self {
        self.a = Some(law);
        self
    }

    pub fn with_b(mut self, law: MixingLaw) -> Self {
        self.b = Some(law);
        self
    }

    pub fn with_lambda(mut self, law: MixingLaw) -> Self {
        self.lambda = Some(law);
        self
    }

    /// Resolves preset laws and builds the quadrature representations.
    pub fn build(&self) -> Result<Problem> {
        let laws = resolve_laws(self)?;
        let build = |law: &Option<MixingLaw>, field: &str| -> Result<Option<MixingDistribution>> {
            law.as_ref()
                .map(|l| l.build().map_err(|e| Error::config(format!("problem.{field}"), e.to_string())))
                .transpose()
        };
        let t = build(&laws.t, "T")?.ok_or_else(|| Error::config("problem.T", "missing law of T"))?;
        Problem::from_distributions(
            self.family,
            self.mu,
            t,
            build(&laws.a, "A")?,
            build(&laws.b, "B")?,
            build(&laws.lambda, "Lambda")?,
            &self.grid,
            self.solver,
        )
        .map(|mut p| {
            p.spec = Some(self.resolved(&p));
            p.laws = Some(laws);
            p
        })
    }

    fn resolved(&self, p: &Problem) -> ProblemSpec {
        ProblemSpec {
            grid: GridConfig::filled(&p.grid),
            ..self.clone()
        }
    }
}

/// Laws after presets have been applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedLaws {
    #[serde(rename = "T")]
    pub t: Option<MixingLaw>,
    #[serde(rename = "A")]
    pub a: Option<MixingLaw>,
    #[serde(rename = "B")]
    pub b: Option<MixingLaw>,
    #[serde(rename = "Lambda")]
    pub lambda: Option<MixingLaw>,
}

fn resolve_laws(spec: &ProblemSpec) -> Result<ResolvedLaws> {
    spec.family.validate()?;
    let id = spec.family.id();
    let required = |v: &Option<MixingLaw>, name: &str| {
        v.clone()
            .ok_or_else(|| Error::config(format!("problem.{name}"), format!("family `{id}` needs the law of {name}")))
    };
    let implied = |v: &Option<MixingLaw>, name: &str, law: MixingLaw| {
        if v.is_some() {
            Err(Error::config(
                format!("problem.{name}"),
                format!("family `{id}` fixes the law of {name}; remove it"),
            ))
        } else {
            Ok(Some(law))
        }
    };
    let absent = |v: &Option<MixingLaw>, name: &str| {
        if v.is_some() {
            Err(Error::config(format!("problem.{name}"), format!("family `{id}` does not use {name}")))
        } else {
            Ok(None)
        }
    };
    let b_default = spec.b.clone().or(Some(MixingLaw::point(0.0)));
    let zero = MixingLaw::point(0.0);
    let laws = match spec.family {
        Family::PowerMixtureExp => ResolvedLaws {
            t: Some(required(&spec.t, "T")?),
            a: Some(required(&spec.a, "A")?),
            b: b_default,
            lambda: absent(&spec.lambda, "Lambda")?,
        },
        Family::ParetoMixA { lambda } => ResolvedLaws {
            t: Some(required(&spec.t, "T")?),
            a: Some(required(&spec.a, "A")?),
            b: b_default,
            lambda: implied(&spec.lambda, "Lambda", MixingLaw::point(lambda))?,
        },
        Family::ParetoMixLambda { a } => ResolvedLaws {
            t: Some(required(&spec.t, "T")?),
            a: implied(&spec.a, "A", MixingLaw::point(a))?,
            b: b_default,
            lambda: Some(required(&spec.lambda, "Lambda")?),
        },
        Family::ParetoMixBoth => ResolvedLaws {
            t: Some(required(&spec.t, "T")?),
            a: Some(required(&spec.a, "A")?),
            b: b_default,
            lambda: Some(required(&spec.lambda, "Lambda")?),
        },
        Family::ZetaFamily { .. } => ResolvedLaws {
            t: Some(required(&spec.t, "T")?),
            a: absent(&spec.a, "A")?,
            b: absent(&spec.b, "B")?,
            lambda: Some(required(&spec.lambda, "Lambda")?),
        },
        Family::CompoundExponential => ResolvedLaws {
            t: Some(required(&spec.t, "T")?),
            a: implied(&spec.a, "A", MixingLaw::Exp(1.0))?,
            b: implied(&spec.b, "B", zero)?,
            lambda: absent(&spec.lambda, "Lambda")?,
        },
        Family::CompoundPoisson => ResolvedLaws {
            t: Some(required(&spec.t, "T")?),
            a: implied(&spec.a, "A", MixingLaw::point(1.0))?,
            b: implied(&spec.b, "B", zero)?,
            lambda: absent(&spec.lambda, "Lambda")?,
        },
        Family::Corollary1 => ResolvedLaws {
            t: Some(required(&spec.t, "T")?),
            a: Some(required(&spec.a, "A")?),
            b: implied(&spec.b, "B", zero)?,
            lambda: absent(&spec.lambda, "Lambda")?,
        },
        Family::Corollary4 { p } => ResolvedLaws {
            t: implied(&spec.t, "T", MixingLaw::point(p))?,
            a: Some(required(&spec.a, "A")?),
            b: implied(&spec.b, "B", zero)?,
            lambda: absent(&spec.lambda, "Lambda")?,
        },
        Family::SigmaStar => ResolvedLaws {
            t: Some(required(&spec.t, "T")?),
            a: absent(&spec.a, "A")?,
            b: absent(&spec.b, "B")?,
            lambda: absent(&spec.lambda, "Lambda")?,
        },
    };
    Ok(laws)
}

/// One equation family with its mixing laws, grid and iteration settings.
#[derive(Debug, Clone)]
pub struct Problem {
    pub family: Family,
    pub mu: f64,
    pub t: MixingDistribution,
    pub a: Option<MixingDistribution>,
    pub b: Option<MixingDistribution>,
    pub lambda: Option<MixingDistribution>,
    pub grid: GridSpec,
    pub settings: SolverSettings,
    /// Present when built from a [`ProblemSpec`]; grid fields filled in.
    pub spec: Option<ProblemSpec>,
    pub laws: Option<ResolvedLaws>,
    zeta_a: Option<f64>,
}

/// Outcome of one moment condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub name: String,
    pub value: f64,
    pub target: f64,
    /// Distance to the boundary for inequalities, absolute error for equalities.
    pub margin: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionRecord {
    pub family: String,
    pub checks: Vec<ConditionCheck>,
    pub passed: bool,
}

impl ConditionRecord {
    pub fn first_failure(&self) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| !c.passed)
    }

    /// Rejection naming the first violated condition.
    pub fn require(&self) -> Result<()> {
        match self.first_failure() {
            None => Ok(()),
            Some(c) => Err(Error::Condition(format!(
                "{} violated (value {}, target {})",
                c.name, c.value, c.target
            ))),
        }
    }
}

/// Relative tolerance of the equality conditions.
pub const CONDITION_TOLERANCE: f64 = 1e-8;
/// `E[T]` closer than this to 1 is rejected.
pub const ET_MARGIN: f64 = 1e-9;

impl Problem {
    #[allow(clippy::too_many_arguments)]
    pub fn from_distributions(
        family: Family,
        mu: f64,
        t: MixingDistribution,
        a: Option<MixingDistribution>,
        b: Option<MixingDistribution>,
        lambda: Option<MixingDistribution>,
        grid: &GridConfig,
        settings: SolverSettings,
    ) -> Result<Problem> {
        family.validate()?;
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::config("problem.mu", format!("mean must be positive, got {mu}")));
        }
        settings.validate()?;
        let needs_a = !matches!(family, Family::ZetaFamily { .. } | Family::SigmaStar);
        let needs_lambda = matches!(
            family,
            Family::ParetoMixA { .. } | Family::ParetoMixLambda { .. } | Family::ParetoMixBoth | Family::ZetaFamily { .. }
        );
        if needs_a && a.is_none() {
            return Err(Error::config("problem.A", format!("family `{family}` needs the law of A")));
        }
        if needs_lambda && lambda.is_none() {
            return Err(Error::config("problem.Lambda", format!("family `{family}` needs the law of Λ")));
        }
        let grid = grid.resolve(mu, t.t_max())?;
        let zeta_a = match family {
            Family::ZetaFamily { a } => Some(zeta(a)?),
            _ => None,
        };
        Ok(Problem {
            family,
            mu,
            t,
            a,
            b: b.or_else(|| needs_a.then(|| MixingLaw::point(0.0).build().expect("valid atom"))),
            lambda,
            grid,
            settings,
            spec: None,
            laws: None,
            zeta_a,
        })
    }

    pub fn law_moments(&self) -> LawMoments {
        let m = |d: &Option<MixingDistribution>| d.as_ref().map(|d| d.moments()).unwrap_or((0.0, 0.0));
        let (et, _) = self.t.moments();
        let (ea, ea2) = m(&self.a);
        let (eb, _) = m(&self.b);
        let (el, el2) = m(&self.lambda);
        LawMoments { mu: self.mu, et, ea, ea2, eb, el, el2 }
    }

    /// Total probability dropped by truncating unbounded mixing laws.
    pub fn truncated_mass(&self) -> f64 {
        [Some(&self.t), self.a.as_ref(), self.b.as_ref(), self.lambda.as_ref()]
            .into_iter()
            .flatten()
            .map(|d| d.truncated_mass())
            .sum()
    }

    /// Every moment condition of the family, evaluated with declared moments.
    pub fn check_conditions(&self) -> Result<ConditionRecord> {
        let m = self.law_moments();
        let mut checks = Vec::new();
        checks.push(ConditionCheck {
            name: "E[T]<1".into(),
            value: m.et,
            target: 1.0,
            margin: 1.0 - m.et,
            passed: m.et >= 0.0 && m.et < 1.0 - ET_MARGIN,
        });
        let equal = |name: &str, value: f64, target: f64| {
            let err = (value - target).abs();
            ConditionCheck {
                name: name.into(),
                value,
                target,
                margin: err,
                passed: err <= CONDITION_TOLERANCE * target.abs().max(1.0),
            }
        };
        let finite = |name: &str, value: f64| ConditionCheck {
            name: name.into(),
            value,
            target: f64::INFINITY,
            margin: f64::INFINITY,
            passed: value.is_finite(),
        };
        match self.family {
            f if f.is_power_mixture() => {
                checks.push(equal("E[A]=1", m.ea, 1.0));
                checks.push(finite("E[A^2]<inf", m.ea2));
                checks.push(finite("E[B]<inf", m.eb));
            }
            Family::ParetoMixA { lambda } => {
                checks.push(equal("E[A]=1/λ", m.ea, 1.0 / lambda));
                checks.push(finite("E[A^2]<inf", m.ea2));
                checks.push(finite("E[B]<inf", m.eb));
            }
            Family::ParetoMixLambda { a } => {
                checks.push(equal("E[Λ]=1/a", m.el, 1.0 / a));
                checks.push(finite("E[Λ^2]<inf", m.el2));
                checks.push(finite("E[B]<inf", m.eb));
            }
            Family::ParetoMixBoth => {
                checks.push(equal("E[AΛ]=1", m.ea * m.el, 1.0));
                checks.push(finite("E[A^2]<inf", m.ea2));
                checks.push(finite("E[Λ^2]<inf", m.el2));
                checks.push(finite("E[B]<inf", m.eb));
            }
            Family::ZetaFamily { a } => {
                let z = zeta_triple(a)?;
                checks.push(equal("E[Λ]=-ζ(a)/ζ'(a)", m.el, -z.zeta / z.dzeta));
                checks.push(finite("E[Λ^2]<inf", m.el2));
            }
            _ => {}
        }
        let passed = checks.iter().all(|c| c.passed);
        Ok(ConditionRecord {
            family: self.family.id().into(),
            checks,
            passed,
        })
    }

    /// `(m1, m2)` of the initial two-point transform.
    pub fn init_moments(&self) -> Result<(f64, f64)> {
        let m = self.law_moments();
        let mu2 = self.mu * self.mu;
        let denom = 1.0 - m.et;
        let ratio = match self.family {
            f if f.is_power_mixture() => (m.ea2 + m.eb) / denom,
            Family::ParetoMixA { .. } | Family::ParetoMixLambda { .. } | Family::ParetoMixBoth => {
                // E[A(A+1)Λ^2] factorizes by independence
                ((m.ea2 + m.ea) * m.el2 + m.eb) / denom
            }
            Family::ZetaFamily { a } => {
                let z = zeta_triple(a)?;
                z.d2zeta * m.el2 / (z.zeta * denom)
            }
            _ => {
                return Err(Error::capability("solver", "the σ* equation has no iteration"));
            }
        };
        let m2 = ratio * mu2;
        if !(m2.is_finite() && m2 >= mu2 * (1.0 - 1e-12)) {
            return Err(Error::Numerical(format!(
                "internal consistency: initial m2 = {m2} below m1^2 = {mu2}; condition checks should have caught this"
            )));
        }
        Ok((self.mu, m2.max(mu2)))
    }

    /// Family map applied to one value of σ.
    pub fn apply_map(&self, sigma: f64) -> Result<f64> {
        Ok(1.0 - self.apply_map_complement(sigma)?)
    }

    /// `1 - Φ(σ)`, computed without cancellation for small σ.
    pub fn apply_map_complement(&self, sigma: f64) -> Result<f64> {
        let inner = |x: f64| -> Result<f64> {
            match &self.b {
                Some(b) => sigma_b(b, x),
                None => Ok(x),
            }
        };
        let v = match self.family {
            f if f.is_power_mixture() => {
                let x = inner(sigma)?;
                self.a.as_ref().expect("checked at construction").transform_complement(x)
            }
            Family::ParetoMixA { .. } | Family::ParetoMixLambda { .. } | Family::ParetoMixBoth => {
                let x = inner(sigma)?;
                let a = self.a.as_ref().expect("checked at construction");
                let l = self.lambda.as_ref().expect("checked at construction");
                a.expect(|av| l.expect(|lv| -(-av * (lv * x).ln_1p()).exp_m1()))
            }
            Family::ZetaFamily { a } => {
                let l = self.lambda.as_ref().expect("checked at construction");
                let za = self.zeta_a.expect("set at construction");
                l.try_expect(|lv| zeta_drop(a, lv * sigma))? / za
            }
            _ => return Err(Error::capability("solver", "the σ* equation has no family map")),
        };
        Ok(v.clamp(0.0, 1.0))
    }
}

/// Upper envelope `1 - c + c/(1 + λ s)`, `c = F_T(p)(1-p)`, `λ = mu/c`, valid for
/// compound-exponential solutions with `T` in `[0, 1]`.
pub fn mixture_envelope(mu: f64, f_t_at_p: f64, p: f64) -> Result<crate::transforms::Transform> {
    let c = f_t_at_p * (1.0 - p);
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::domain(format!("need F_T(p)(1-p) in (0, 1], got {c}")));
    }
    let lambda = mu / c;
    crate::transforms::Transform::catalog(crate::transforms::CatalogEntry::ExpMixtureWithAtom {
        p: 1.0 - c,
        beta: 1.0 / lambda,
        mu: Some(mu),
    })
}
