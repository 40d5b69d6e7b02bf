//! Command-line front end: `powermix <command> [--config FILE] [--set k=v]... [--out DIR] [--seed N]`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde_json::{json, Value};

use crate::config::{apply_overrides, Command, RunConfig};
use crate::error::{Error, Result};
use crate::law::Law;
use crate::mixing::{MixingLaw, DEFAULT_PIECE_NODES, TRUNCATION_TAIL};
use crate::moments::{self, Richardson, RICHARDSON_LEVELS, RICHARDSON_START};
use crate::simulate::{verify_equation, MIN_SAMPLES, QUANTILE};
use crate::solver::{self, Family, ProblemSpec, CONDITION_TOLERANCE, ET_MARGIN};
use crate::transforms::{CatalogEntry, Transform, CM_TOLERANCE};

pub const DEFAULT_OUT: &str = "powermix-out";

#[derive(Debug, Parser)]
#[command(name = "powermix", version, about = "Solve and verify power-mixture transform equations")]
pub struct Args {
    /// Command to run; overrides `command` in the config file.
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// JSON config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dotted-path override, e.g. `grid.nodes=1024` or `T={"atom":[0,1]}`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output directory for report.json and nodes.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Outcome of one command.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub passed: bool,
    pub summary: String,
    pub report: Value,
    pub nodes_csv: Option<String>,
}

/// Exit status: 0 pass, 2 failed verification or non-convergence, 1 config error.
pub fn exit_code(result: &Result<Outcome>) -> i32 {
    match result {
        Ok(o) if o.passed => 0,
        Ok(_) => 2,
        Err(Error::Config { .. } | Error::Io(_)) => 1,
        Err(_) => 2,
    }
}

/// Builds the config from the arguments.
pub fn config_from_args(args: &Args) -> Result<RunConfig> {
    let mut doc = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => json!({}),
    };
    let mut sets = args.set.clone();
    if let Some(c) = args.command {
        sets.insert(0, format!("command={}", c.name()));
    }
    if let Some(s) = args.seed {
        sets.push(format!("seed={s}"));
    }
    apply_overrides(&mut doc, &sets)?;
    if doc.get("command").is_none() {
        return Err(Error::config("command", "no command given"));
    }
    let mut cfg = RunConfig::from_value(doc)?;
    if let Some(out) = &args.out {
        cfg.out = Some(out.clone());
    }
    Ok(cfg)
}

/// Parses arguments, runs, writes files and prints a summary; returns the exit status.
pub fn main_with(args: Args) -> i32 {
    let cfg = match config_from_args(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("powermix: {e}");
            return 1;
        }
    };
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let result = run(&cfg);
    let code = exit_code(&result);
    let written = match &result {
        Ok(o) => write_outputs(&out, o),
        Err(e) => {
            eprintln!("powermix: {e}");
            if code == 1 {
                return code;
            }
            let report = envelope(&cfg, &cfg, json!({ "error": e.to_string() }), false);
            write_outputs(
                &out,
                &Outcome {
                    passed: false,
                    summary: String::new(),
                    report,
                    nodes_csv: None,
                },
            )
        }
    };
    if let Err(e) = written {
        eprintln!("powermix: {e}");
        return 1;
    }
    if let Ok(o) = &result {
        println!("{}", o.summary);
        if !o.passed {
            eprintln!("powermix: {} did not pass", cfg.command.name());
        }
    }
    code
}

fn write_outputs(dir: &Path, o: &Outcome) -> Result<()> {
    fs::create_dir_all(dir)?;
    let text = serde_json::to_string_pretty(&o.report).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(dir.join("report.json"), text + "\n")?;
    if let Some(csv) = &o.nodes_csv {
        fs::write(dir.join("nodes.csv"), csv)?;
    }
    Ok(())
}

fn tolerances(cfg: &RunConfig) -> Value {
    let mut t = json!({
        "condition_relative": CONDITION_TOLERANCE,
        "et_margin": ET_MARGIN,
    });
    let m = t.as_object_mut().expect("object");
    if let Some(p) = &cfg.problem {
        m.insert("solver_tol".into(), json!(p.solver.tol));
        m.insert("max_iters".into(), json!(p.solver.max_iters));
        m.insert("tau_mono".into(), json!(p.solver.tau_mono));
        m.insert("quadrature_nodes_per_piece".into(), json!(DEFAULT_PIECE_NODES));
        m.insert("truncation_tail".into(), json!(TRUNCATION_TAIL));
        m.insert("richardson_start_times_mu".into(), json!(RICHARDSON_START));
        m.insert("richardson_levels".into(), json!(RICHARDSON_LEVELS));
    }
    match cfg.command {
        Command::Residual => {
            m.insert("residual_tol".into(), json!(cfg.residual_tol));
        }
        Command::Simulate => {
            m.insert("bootstrap_quantile".into(), json!(QUANTILE));
            m.insert("min_samples".into(), json!(MIN_SAMPLES));
            if let Some(s) = &cfg.simulate {
                m.insert("resamples".into(), json!(s.resamples));
            }
        }
        Command::Moments => {
            m.insert("richardson_start_times_mu".into(), json!(RICHARDSON_START));
            m.insert("richardson_levels".into(), json!(RICHARDSON_LEVELS));
        }
        Command::Catalog => {
            m.insert("cm_tolerance".into(), json!(CM_TOLERANCE));
        }
        _ => {}
    }
    t
}

fn envelope(cfg: &RunConfig, resolved: &RunConfig, result: Value, passed: bool) -> Value {
    json!({
        "tool": "powermix",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cfg.command.name(),
        "passed": passed,
        "config": resolved,
        "tolerances": tolerances(resolved),
        "result": result,
    })
}

/// Runs one command without touching the file system.
pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    match cfg.command {
        Command::Solve => run_solve(cfg),
        Command::Residual => run_residual(cfg),
        Command::Simulate => run_simulate(cfg),
        Command::Moments => run_moments(cfg),
        Command::Conditions => run_conditions(cfg),
        Command::Catalog => Ok(run_catalog(cfg)),
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn run_solve(cfg: &RunConfig) -> Result<Outcome> {
    let resolved = cfg.resolved()?;
    let problem = resolved.problem.as_ref().expect("validated").build()?;
    let report = solver::solve(&problem)?;
    let golden = cfg.golden.clone().map(Transform::catalog).transpose()?;
    let mut csv = String::from("s,F,reference,abs_gap\n");
    let g = &report.transform;
    for (&s, &v) in g.nodes().iter().zip(g.values()) {
        match &golden {
            Some(t) => {
                let r = t.eval(s)?;
                let _ = writeln!(csv, "{},{},{},{}", num(s), num(v), num(r), num((v - r).abs()));
            }
            None => {
                let _ = writeln!(csv, "{},{},,", num(s), num(v));
            }
        }
    }
    let golden_error = golden.as_ref().map(|t| report.sup_error_against(t)).transpose()?;
    let mut body = serde_json::to_value(&report).map_err(|e| Error::Io(e.to_string()))?;
    if let Some(m) = body.as_object_mut() {
        m.remove("initial");
        m.remove("transform");
        m.insert("golden_sup_error".into(), json!(golden_error));
        m.insert("laws".into(), json!(problem.laws));
    }
    let passed = report.passed();
    let summary = format!(
        "solve {}: converged={} iterations={} monotonicity_violations={} variance={:?} (formula {}){}",
        report.family,
        report.converged,
        report.iterations,
        report.monotonicity.violations,
        report.variance_extracted,
        report.variance_formula,
        golden_error.map(|e| format!(" golden_sup_error={e:.3e}")).unwrap_or_default()
    );
    Ok(Outcome {
        passed,
        summary,
        report: envelope(cfg, &resolved, body, passed),
        nodes_csv: Some(csv),
    })
}

fn run_residual(cfg: &RunConfig) -> Result<Outcome> {
    let resolved = cfg.resolved()?;
    let problem = resolved.problem.as_ref().expect("validated").build()?;
    let candidate = Transform::catalog(cfg.candidate.clone().expect("validated"))?;
    let r = solver::residual(&problem, &candidate)?;
    let mut csv = String::from("s,F,mapped,abs_gap\n");
    for ((s, c), m) in r.nodes.iter().zip(&r.candidate).zip(&r.mapped) {
        let _ = writeln!(csv, "{},{},{},{}", num(*s), num(*c), num(*m), num((c - m).abs()));
    }
    let passed = r.sup <= cfg.residual_tol;
    let summary = format!("residual {}: sup={:.3e} at s={:.4} (tol {:e})", r.family, r.sup, r.at, cfg.residual_tol);
    let body = json!({ "family": r.family, "sup": r.sup, "at": r.at });
    Ok(Outcome {
        passed,
        summary,
        report: envelope(cfg, &resolved, body, passed),
        nodes_csv: Some(csv),
    })
}

fn run_simulate(cfg: &RunConfig) -> Result<Outcome> {
    let spec = cfg.equation_spec()?;
    let r = verify_equation(&spec)?;
    let summary = format!(
        "simulate {}: gap={:.3e} threshold={:.3e} passed={}",
        spec.equation.describe(),
        r.gap,
        r.threshold,
        r.passed
    );
    let body = serde_json::to_value(&r).map_err(|e| Error::Io(e.to_string()))?;
    Ok(Outcome {
        passed: r.passed,
        summary,
        report: envelope(cfg, cfg, body, r.passed),
        nodes_csv: None,
    })
}

fn run_moments(cfg: &RunConfig) -> Result<Outcome> {
    let m = cfg.moments.as_ref().expect("validated");
    let law = &m.law;
    let mu = law
        .mean()
        .ok_or_else(|| Error::domain("moments needs a law with finite mean"))?;
    let extracted = match law.transform() {
        Some(t) => {
            let r = Richardson::for_scale(mu);
            let m1 = moments::mean_with(&t, r)?;
            let m2 = moments::second_moment_with(&t, mu, r).ok();
            json!({ "mean": m1, "second_moment": m2 })
        }
        None => Value::Null,
    };
    let mut iterates = Vec::new();
    for k in 1..=m.order {
        let (descriptor, note) = match moments::equilibrium_iterate(law, k) {
            Ok(l) => (json!(l), Value::Null),
            Err(e) => (Value::Null, json!(e.to_string())),
        };
        iterates.push(json!({
            "order": k,
            "law": descriptor,
            "predicted_mean": moments::equilibrium_mean_prediction(law, k as u32 + 1),
            "error": note,
        }));
    }
    let lb = moments::length_biased(law, mu).map(|l| json!(l)).unwrap_or_else(|e| json!({ "error": e.to_string() }));
    let body = json!({
        "mean": mu,
        "second_moment": law.moment(2),
        "extracted": extracted,
        "length_biased": lb,
        "equilibrium": iterates,
    });
    let summary = format!("moments: mean={mu} second_moment={:?}", law.moment(2));
    Ok(Outcome {
        passed: true,
        summary,
        report: envelope(cfg, cfg, body, true),
        nodes_csv: None,
    })
}

/// Builds a problem for a condition check, filling required but absent laws with `δ_0`.
fn condition_problem(spec: &ProblemSpec) -> Result<(solver::Problem, Vec<String>)> {
    let mut spec = spec.clone();
    let mut defaulted = Vec::new();
    loop {
        match spec.build() {
            Ok(p) => return Ok((p, defaulted)),
            Err(Error::Config { field, message }) if message.contains("needs the law") && defaulted.len() < 4 => {
                let slot = match field.as_str() {
                    "problem.T" => &mut spec.t,
                    "problem.A" => &mut spec.a,
                    "problem.B" => &mut spec.b,
                    "problem.Lambda" => &mut spec.lambda,
                    _ => return Err(Error::Config { field, message }),
                };
                *slot = Some(MixingLaw::point(0.0));
                defaulted.push(field.trim_start_matches("problem.").to_string());
            }
            Err(e) => return Err(e),
        }
    }
}

fn run_conditions(cfg: &RunConfig) -> Result<Outcome> {
    let spec = cfg.problem.as_ref().expect("validated");
    let (problem, defaulted) = condition_problem(spec)?;
    let record = problem.check_conditions()?;
    let summary = match record.require() {
        Ok(()) => format!("conditions {}: all hold", record.family),
        Err(e) => match e {
            Error::Condition(m) => m,
            other => other.to_string(),
        },
    };
    let body = json!({
        "record": record,
        "defaulted_to_zero_atom": defaulted,
        "moments": problem.law_moments(),
    });
    Ok(Outcome {
        passed: record.passed,
        summary,
        report: envelope(cfg, cfg, body, record.passed),
        nodes_csv: None,
    })
}

fn run_catalog(cfg: &RunConfig) -> Outcome {
    let entries = CatalogEntry::identifiers();
    let mut summary = String::new();
    for e in entries {
        let _ = writeln!(summary, "{:<18} {:<40} {}", e.id, e.params, e.formula);
    }
    summary.push_str("families: ");
    summary.push_str(&Family::IDS.join(", "));
    let laws = ["degenerate", "exponential", "gamma", "exp_mixture_with_atom", "uniform", "beta", "example2d", "power", "pareto", "hyperbolic", "size_biased_hyperbolic", "scaled", "product", "length_biased", "equilibrium"];
    let mixing = ["atom", "atoms", "uniform", "beta_tail", "example2d", "usquared", "exp"];
    let body = json!({
        "transforms": entries,
        "families": Family::IDS,
        "mixing_laws": mixing,
        "simulation_laws": laws,
        "sample_law": Law::cosh_squared(1.0),
    });
    Outcome {
        passed: true,
        summary,
        report: envelope(cfg, cfg, body, true),
        nodes_csv: None,
    }
}
