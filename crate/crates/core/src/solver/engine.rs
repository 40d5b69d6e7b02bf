use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::problem::{ConditionRecord, Problem, SolverSettings};
use crate::error::{Error, Result};
use crate::grid::GridTransform;
use crate::mixing::{sigma, sigma_star_on_grid, sigma_with};
use crate::moments::{mean_with, second_moment_with, MomentEstimate, Richardson};
use crate::transforms::{two_point_bound, Transform};

/// Per-iteration diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Sup-norm change over `[0, s_max]`.
    pub delta: f64,
    /// Largest increase over the previous iterate, any node.
    pub ascent: f64,
    pub ascent_nodes: usize,
    pub m1_hat: Option<f64>,
    pub m2_hat: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monotonicity {
    /// Iterations with an ascent above `tau_mono`.
    pub violations: usize,
    pub worst: f64,
    pub tau_mono: f64,
}

impl Monotonicity {
    pub fn within_slack(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub family: String,
    pub converged: bool,
    pub iterations: usize,
    pub settings: SolverSettings,
    pub conditions: ConditionRecord,
    pub trace: Vec<IterationRecord>,
    pub monotonicity: Monotonicity,
    /// `(m1, m2)` of the two-point start.
    pub init_moments: (f64, f64),
    pub m1: Option<MomentEstimate>,
    pub m2: Option<MomentEstimate>,
    /// Largest relative drift of the per-iterate moment estimates from the start.
    pub m1_drift: f64,
    pub m2_drift: f64,
    pub variance_formula: f64,
    pub variance_extracted: Option<f64>,
    /// `|extracted - formula|` relative to the formula, or to `mu^2` when the
    /// formula is below `1e-6 mu^2`.
    pub variance_residual: Option<f64>,
    /// `max(F_final - F_start)^+`; the final iterate should stay below the start.
    pub bound_violation: f64,
    /// Geometric mean of successive delta ratios over the tail of the run.
    pub contraction_ratio: Option<f64>,
    pub truncated_mass: f64,
    pub core_len: usize,
    pub initial: Arc<GridTransform>,
    pub transform: Arc<GridTransform>,
}

impl SolveReport {
    pub fn passed(&self) -> bool {
        self.converged && self.monotonicity.within_slack()
    }

    /// Sup-norm error over `[0, s_max]` against a reference transform.
    pub fn sup_error_against(&self, reference: &Transform) -> Result<f64> {
        let g = &self.transform;
        let mut worst = 0.0f64;
        for (&s, &v) in g.nodes().iter().zip(g.values()).take(self.core_len) {
            worst = worst.max((v - reference.eval(s)?).abs());
        }
        Ok(worst)
    }

    /// The final iterate as a [`Transform`].
    pub fn solution(&self) -> Transform {
        Transform::Grid(self.transform.clone())
    }
}

/// Applies the family map once, node by node.
///
/// `prev` must carry its mean; beyond its last node it is held constant.
pub fn iterate_once(problem: &Problem, prev: &GridTransform) -> Result<GridTransform> {
    let mu = prev
        .mean()
        .ok_or_else(|| Error::Contract("iterate needs a grid transform with known mean".into()))?;
    let top = problem.grid.s_max * problem.t.t_max().max(1.0);
    if prev.upper() < top * (1.0 - 1e-12) {
        return Err(Error::Range { s: top, lo: 0.0, hi: prev.upper() });
    }
    let m2 = prev.second_moment();
    let complement = prev
        .nodes()
        .par_iter()
        .map(|&s| {
            if s == 0.0 {
                return Ok(0.0);
            }
            let sig = sigma_with(|x| Ok(prev.complement_clamped(x)), mu, m2, &problem.t, s)?;
            problem.apply_map_complement(sig)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(GridTransform::from_complement(prev.nodes().to_vec(), complement, Some(mu))?.with_second_moment(m2))
}

/// Iterates from the two-point upper bound with the family's initial moments.
pub fn solve(problem: &Problem) -> Result<SolveReport> {
    let conditions = problem.check_conditions()?;
    conditions.require()?;
    let (m1, m2) = problem.init_moments()?;
    let start = two_point_bound(m1, m2)?;
    let nodes = problem.grid.build()?;
    let initial = GridTransform::sample_complement(nodes, Some(m1), |s| start.complement(s))?.with_second_moment(Some(m2));
    run(problem, initial, (m1, m2), conditions)
}

/// Iterates from any start carrying the problem's mean.
pub fn solve_from(problem: &Problem, start: &Transform) -> Result<SolveReport> {
    let conditions = problem.check_conditions()?;
    conditions.require()?;
    let m1 = start
        .mean()
        .ok_or_else(|| Error::Contract("start transform needs a known mean".into()))?;
    if (m1 - problem.mu).abs() > 1e-8 * problem.mu {
        return Err(Error::Contract(format!(
            "start transform has mean {m1}, the problem needs {}",
            problem.mu
        )));
    }
    let m2 = match start.second_moment() {
        Some(v) => v,
        None => problem.init_moments()?.1,
    };
    let nodes = problem.grid.build()?;
    let initial = GridTransform::sample_complement(nodes, Some(m1), |s| start.complement(s))?.with_second_moment(Some(m2));
    run(problem, initial, (m1, m2), conditions)
}

fn moment_estimates(g: &GridTransform, mu: f64) -> (Option<MomentEstimate>, Option<MomentEstimate>) {
    let t = Transform::Grid(Arc::new(g.clone()));
    let r = Richardson::for_scale(mu);
    (mean_with(&t, r).ok(), second_moment_with(&t, mu, r).ok())
}

fn run(problem: &Problem, initial: GridTransform, init: (f64, f64), conditions: ConditionRecord) -> Result<SolveReport> {
    let settings = problem.settings;
    let core_len = problem.grid.core_len();
    let mu = problem.mu;
    let mut trace = Vec::new();
    let mut prev = initial.clone();
    let mut converged = false;
    let mut violations = 0;
    let mut worst_ascent = 0.0f64;
    for n in 1..=settings.max_iters {
        let next = iterate_once(problem, &prev)?;
        let delta = next.sup_distance(&prev, core_len);
        let (ascent, ascent_nodes) = next.max_ascent_over(&prev);
        if ascent > settings.tau_mono {
            violations += 1;
        }
        worst_ascent = worst_ascent.max(ascent);
        let (e1, e2) = moment_estimates(&next, mu);
        trace.push(IterationRecord {
            iteration: n,
            delta,
            ascent,
            ascent_nodes,
            m1_hat: e1.map(|e| e.value),
            m2_hat: e2.map(|e| e.value),
        });
        prev = next;
        if delta <= settings.tol {
            converged = true;
            break;
        }
    }
    let (m1_est, m2_est) = moment_estimates(&prev, mu);
    let drift = |f: fn(&IterationRecord) -> Option<f64>, target: f64| {
        trace
            .iter()
            .filter_map(f)
            .map(|v| (v - target).abs() / target)
            .fold(0.0, f64::max)
    };
    let m1_drift = drift(|r| r.m1_hat, init.0);
    let m2_drift = drift(|r| r.m2_hat, init.1);
    let variance_formula = problem.family.variance_formula(&problem.law_moments())?;
    let variance_extracted = match (&m1_est, &m2_est) {
        (Some(a), Some(b)) => Some(b.value - a.value * a.value),
        _ => None,
    };
    let scale = if variance_formula.abs() > 1e-6 * mu * mu { variance_formula.abs() } else { mu * mu };
    let variance_residual = variance_extracted.map(|v| (v - variance_formula).abs() / scale);
    let bound_violation = prev
        .complements()
        .iter()
        .zip(initial.complements())
        .map(|(a, b)| b - a)
        .fold(0.0, f64::max);
    Ok(SolveReport {
        family: problem.family.id().into(),
        converged,
        iterations: trace.len(),
        settings,
        conditions,
        contraction_ratio: contraction_ratio(&trace, settings.tol),
        trace,
        monotonicity: Monotonicity {
            violations,
            worst: worst_ascent,
            tau_mono: settings.tau_mono,
        },
        init_moments: init,
        m1: m1_est,
        m2: m2_est,
        m1_drift,
        m2_drift,
        variance_formula,
        variance_extracted,
        variance_residual,
        bound_violation,
        truncated_mass: problem.truncated_mass(),
        core_len,
        initial: Arc::new(initial),
        transform: Arc::new(prev),
    })
}

fn contraction_ratio(trace: &[IterationRecord], tol: f64) -> Option<f64> {
    let deltas: Vec<f64> = trace.iter().map(|r| r.delta).collect();
    let ratios: Vec<f64> = deltas
        .windows(2)
        .filter(|w| w[0] > 100.0 * tol.max(f64::EPSILON) && w[1] > 0.0)
        .map(|w| w[1] / w[0])
        .collect();
    if ratios.is_empty() {
        return None;
    }
    let tail = &ratios[ratios.len() / 2..];
    Some((tail.iter().map(|r| r.ln()).sum::<f64>() / tail.len() as f64).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub family: String,
    /// `sup |F(s) - Φ(F)(s)|` over the core grid.
    pub sup: f64,
    pub at: f64,
    pub nodes: Vec<f64>,
    pub candidate: Vec<f64>,
    pub mapped: Vec<f64>,
}

/// Distance between a candidate transform and its image under the family map.
pub fn residual(problem: &Problem, candidate: &Transform) -> Result<ResidualReport> {
    let mut nodes = problem.grid.build()?;
    nodes.truncate(problem.grid.core_len());
    if candidate.mean().is_none() {
        return Err(Error::Contract("residual needs a candidate with known mean".into()));
    }
    let mapped: Vec<f64> = match problem.family {
        super::Family::SigmaStar => sigma_star_on_grid(candidate, &problem.t, &nodes)?
            .into_iter()
            .map(|v| (-v).exp())
            .collect(),
        _ => nodes
            .par_iter()
            .map(|&s| problem.apply_map(sigma(candidate, &problem.t, s)?))
            .collect::<Result<Vec<_>>>()?,
    };
    let candidate_values = nodes.iter().map(|&s| candidate.eval(s)).collect::<Result<Vec<_>>>()?;
    let (mut sup, mut at) = (0.0f64, 0.0);
    for ((&s, c), m) in nodes.iter().zip(&candidate_values).zip(&mapped) {
        let d = (c - m).abs();
        if d > sup {
            sup = d;
            at = s;
        }
    }
    Ok(ResidualReport {
        family: problem.family.id().into(),
        sup,
        at,
        nodes,
        candidate: candidate_values,
        mapped,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniquenessProbe {
    /// Sup-norm distance between the two limits over `[0, s_max]`.
    pub distance: f64,
    pub canonical: SolveReport,
    pub alternate: SolveReport,
}

/// Solves from the canonical start and from `alternate`; both must share the mean.
pub fn two_start_uniqueness_probe(problem: &Problem, alternate: &Transform) -> Result<UniquenessProbe> {
    let canonical = solve(problem)?;
    let alternate = solve_from(problem, alternate)?;
    let distance = canonical.transform.sup_distance(&alternate.transform, canonical.core_len);
    Ok(UniquenessProbe {
        distance,
        canonical,
        alternate,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{Family, ProblemSpec};
    use super::*;
    use crate::mixing::MixingLaw;
    use crate::transforms::CatalogEntry;

    fn small(spec: ProblemSpec) -> Problem {
        let mut spec = spec;
        spec.grid.nodes = Some(160);
        spec.build().unwrap()
    }

    #[test]
    fn compound_exponential_with_zero_t_is_exponential() {
        let p = small(ProblemSpec::new(Family::CompoundExponential, 1.0).with_t(MixingLaw::point(0.0)));
        let r = solve(&p).unwrap();
        assert!(r.converged);
        let exp = Transform::catalog(CatalogEntry::Exponential { mu: 1.0 }).unwrap();
        assert!(r.sup_error_against(&exp).unwrap() < 1e-12);
    }

    #[test]
    fn degenerate_solution_converges_at_once() {
        let p = small(ProblemSpec::new(Family::CompoundPoisson, 2.0).with_t(MixingLaw::point(0.0)));
        let r = solve(&p).unwrap();
        assert!(r.converged);
        assert!(r.iterations <= 2);
        let deg = Transform::catalog(CatalogEntry::Degenerate { c: 2.0 }).unwrap();
        assert!(r.sup_error_against(&deg).unwrap() < 1e-12);
    }

    #[test]
    fn residual_separates_right_and_wrong_candidates() {
        let p = small(ProblemSpec::new(Family::CompoundPoisson, 1.0).with_t(MixingLaw::point(0.0)));
        let deg = Transform::catalog(CatalogEntry::Degenerate { c: 1.0 }).unwrap();
        assert!(residual(&p, &deg).unwrap().sup < 1e-12);
        let exp = Transform::catalog(CatalogEntry::Exponential { mu: 1.0 }).unwrap();
        let r = residual(&p, &exp).unwrap();
        assert!(r.sup > 0.1, "{}", r.sup);
    }

    #[test]
    fn wrong_start_mean_is_a_contract_error() {
        let p = small(ProblemSpec::new(Family::CompoundExponential, 1.0).with_t(MixingLaw::point(0.5)));
        let exp = Transform::catalog(CatalogEntry::Exponential { mu: 2.0 }).unwrap();
        assert!(matches!(solve_from(&p, &exp), Err(Error::Contract(_))));
    }

    #[test]
    fn sigma_star_cannot_be_solved() {
        let p = small(ProblemSpec::new(Family::SigmaStar, 1.0).with_t(MixingLaw::Uniform(0.0, 1.0)));
        assert!(matches!(solve(&p), Err(Error::Capability { .. })));
    }
}
