//! Run configuration: a JSON document plus dotted-path overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::law::Law;
use crate::simulate::{Equation, EquationSpec, DEFAULT_RESAMPLES};
use crate::solver::ProblemSpec;
use crate::transforms::CatalogEntry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Solve,
    Residual,
    Simulate,
    Moments,
    Conditions,
    Catalog,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Residual => "residual",
            Command::Simulate => "simulate",
            Command::Moments => "moments",
            Command::Conditions => "conditions",
            Command::Catalog => "catalog",
        }
    }
}

pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-6;
pub const DEFAULT_SAMPLES: usize = 1_000_000;

fn default_residual_tol() -> f64 {
    DEFAULT_RESIDUAL_TOL
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

fn default_resamples() -> usize {
    DEFAULT_RESAMPLES
}

fn default_order() -> usize {
    1
}

fn is_zero(v: &u64) -> bool {
    *v == 0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub equation: Equation,
    pub solution: Law,
    #[serde(rename = "T")]
    pub t: Law,
    #[serde(default = "default_samples")]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    #[serde(default = "default_resamples")]
    pub resamples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsConfig {
    pub law: Law,
    /// Highest equilibrium order to report.
    #[serde(default = "default_order")]
    pub order: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemSpec>,
    /// Closed-form reference for the `solve` node table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub golden: Option<CatalogEntry>,
    /// Transform checked by `residual`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate: Option<CatalogEntry>,
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moments: Option<MomentsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub seed: u64,
}

const TOP_LEVEL: [&str; 9] = [
    "command",
    "problem",
    "golden",
    "candidate",
    "residual_tol",
    "simulate",
    "moments",
    "out",
    "seed",
];

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            problem: None,
            golden: None,
            candidate: None,
            residual_tol: DEFAULT_RESIDUAL_TOL,
            simulate: None,
            moments: None,
            out: None,
            seed: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| {
            Error::config(format!("line {} column {}", e.line(), e.column()), e.to_string())
        })?;
        RunConfig::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_value(value).map_err(|e| Error::config("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Value> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| {
            Error::config(
                format!("{}:{}:{}", path.display(), e.line(), e.column()),
                e.to_string(),
            )
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks everything that can be checked without running the command.
    pub fn validate(&self) -> Result<()> {
        if !(self.residual_tol > 0.0 && self.residual_tol.is_finite()) {
            return Err(Error::config("residual_tol", "must be positive"));
        }
        let need = |present: bool, field: &str| {
            if present {
                Ok(())
            } else {
                Err(Error::config(field, format!("command `{}` needs `{field}`", self.command.name())))
            }
        };
        match self.command {
            Command::Solve => {
                need(self.problem.is_some(), "problem")?;
                if let Some(g) = &self.golden {
                    g.clone().validated().map_err(|e| Error::config("golden", e.to_string()))?;
                }
            }
            Command::Residual => {
                need(self.problem.is_some(), "problem")?;
                need(self.candidate.is_some(), "candidate")?;
                let c = self.candidate.clone().expect("checked");
                c.validated().map_err(|e| Error::config("candidate", e.to_string()))?;
            }
            Command::Conditions => need(self.problem.is_some(), "problem")?,
            Command::Simulate => {
                need(self.simulate.is_some(), "simulate")?;
                self.equation_spec()?
                    .validate()
                    .map_err(|e| Error::config("simulate", e.to_string()))?;
            }
            Command::Moments => {
                need(self.moments.is_some(), "moments")?;
                let m = self.moments.as_ref().expect("checked");
                m.law.validate().map_err(|e| Error::config("moments.law", e.to_string()))?;
                if m.order == 0 {
                    return Err(Error::config("moments.order", "must be at least 1"));
                }
            }
            Command::Catalog => {}
        }
        if let Some(p) = &self.problem {
            p.family.validate()?;
            if !(p.mu.is_finite() && p.mu > 0.0) {
                return Err(Error::config("problem.mu", format!("mean must be positive, got {}", p.mu)));
            }
            p.solver.validate()?;
        }
        Ok(())
    }

    pub fn equation_spec(&self) -> Result<EquationSpec> {
        let s = self
            .simulate
            .as_ref()
            .ok_or_else(|| Error::config("simulate", "missing simulate section"))?;
        Ok(EquationSpec {
            equation: s.equation,
            solution: s.solution.clone(),
            t: s.t.clone(),
            n: s.n,
            seed: self.seed,
            grid: s.grid.clone(),
            resamples: s.resamples,
        })
    }

    /// The config with defaults filled in: grid layout and solver settings.
    pub fn resolved(&self) -> Result<RunConfig> {
        let mut out = self.clone();
        if let Some(p) = &self.problem {
            if self.command != Command::Conditions {
                out.problem = Some(p.build()?.spec.expect("built from a spec"));
            }
        }
        Ok(out)
    }
}

/// Applies `key=value` overrides to a config document.
///
/// Keys are dotted paths; a first segment that is not a top-level key is
/// taken relative to `problem` (so `grid.nodes=1024` works). Values are parsed
/// as JSON when possible and kept as strings otherwise. A plain string given
/// for `problem.family` is read as a family id.
pub fn apply_overrides(doc: &mut Value, overrides: &[String]) -> Result<()> {
    for raw in overrides {
        let (key, val) = raw
            .split_once('=')
            .ok_or_else(|| Error::config(raw.clone(), "override must look like key=value"))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::config(raw.clone(), "empty key"));
        }
        let mut path: Vec<&str> = key.split('.').collect();
        if !TOP_LEVEL.contains(&path[0]) {
            path.insert(0, "problem");
        }
        let mut value = serde_json::from_str::<Value>(val).unwrap_or_else(|_| Value::String(val.to_string()));
        if path == ["problem", "family"] {
            if let Value::String(id) = value {
                value = Value::Object(Map::from_iter([("id".to_string(), Value::String(id))]));
            }
        }
        set_path(doc, &path, value).map_err(|m| Error::config(key.to_string(), m))?;
    }
    Ok(())
}

fn set_path(doc: &mut Value, path: &[&str], value: Value) -> std::result::Result<(), String> {
    let mut cur = doc;
    for (i, seg) in path.iter().enumerate() {
        if !cur.is_object() {
            if cur.is_null() {
                *cur = Value::Object(Map::new());
            } else {
                return Err(format!("`{}` is not an object", path[..i].join(".")));
            }
        }
        let map = cur.as_object_mut().expect("object");
        if i + 1 == path.len() {
            map.insert(seg.to_string(), value);
            return Ok(());
        }
        cur = map.entry(seg.to_string()).or_insert(Value::Null);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixing::MixingLaw;
    use crate::solver::Family;

    fn solve_config() -> RunConfig {
        let mut c = RunConfig::new(Command::Solve);
        c.problem = Some(ProblemSpec::new(Family::CompoundExponential, 1.0).with_t(MixingLaw::point(0.0)));
        c.golden = Some(CatalogEntry::Exponential { mu: 1.0 });
        c
    }

    #[test]
    fn round_trip_is_identity() {
        let c = solve_config();
        assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
        let r = c.resolved().unwrap();
        assert_eq!(RunConfig::from_json(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn overrides_build_a_config() {
        let mut doc = serde_json::json!({});
        let sets: Vec<String> = [
            "command=solve",
            "family=compound_exponential",
            r#"T={"atom":[0,1]}"#,
            "mu=1",
            "grid.nodes=1024",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        apply_overrides(&mut doc, &sets).unwrap();
        let c = RunConfig::from_value(doc).unwrap();
        let p = c.problem.unwrap();
        assert_eq!(p.family, Family::CompoundExponential);
        assert_eq!(p.t, Some(MixingLaw::Atom(0.0, 1.0)));
        assert_eq!(p.grid.nodes, Some(1024));
    }

    #[test]
    fn bad_values_name_the_field() {
        let mut doc = serde_json::json!({});
        let sets = vec!["command=solve".to_string(), "family=theorem9".to_string(), "mu=1".to_string()];
        apply_overrides(&mut doc, &sets).unwrap();
        let e = RunConfig::from_value(doc).unwrap_err();
        assert!(e.to_string().contains("theorem9"), "{e}");
        let e = RunConfig::from_json("{\n \"command\": \"solve\",\n}").unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
        let mut c = solve_config();
        c.problem.as_mut().unwrap().mu = -1.0;
        assert!(matches!(c.validate(), Err(Error::Config { .. })));
    }
}
