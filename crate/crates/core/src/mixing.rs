//! Mixing laws (the distributions of T, A, B and Λ) and the Bernstein
//! functions σ, σ_B and σ* built from them by quadrature.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, GaussLegendre};
use crate::transforms::Transform;

/// Gauss–Legendre nodes per density piece.
pub const DEFAULT_PIECE_NODES: usize = 64;

/// Geometric panels toward `t = 0` for pieces starting at the origin.
const GRADED_PANELS: usize = 12;

/// Upper-tail mass dropped when an unbounded law is truncated.
pub const TRUNCATION_TAIL: f64 = 1e-12;

/// Below this value of `t·s` the σ integrand uses its first-order expansion.
const SMALL_ARGUMENT: f64 = 1e-8;

/// Config-level description of a mixing law.
///
/// JSON forms: `{"atom": [loc, mass]}`, `{"atoms": [[loc, mass], ...]}`,
/// `{"uniform": [lo, hi]}`, `{"beta_tail": a}`, `"example2d"`,
/// `"usquared"`, `{"exp": mu}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixingLaw {
    Atom(f64, f64),
    Atoms(Vec<(f64, f64)>),
    Uniform(f64, f64),
    /// `F(x) = 1 - (1-x)^a` on `(0, 1)`.
    BetaTail(f64),
    /// Density `1/sqrt(t) - 1` on `(0, 1)`.
    #[serde(rename = "example2d")]
    Example2d,
    /// Law of `U^2` with `U` uniform on `[0, 1]`.
    #[serde(rename = "usquared")]
    USquared,
    /// Exponential with the given mean, truncated at its `1 - 1e-12` quantile.
    Exp(f64),
}

impl MixingLaw {
    /// Point mass at `loc`.
    pub fn point(loc: f64) -> Self {
        MixingLaw::Atom(loc, 1.0)
    }

    pub fn build(&self) -> Result<MixingDistribution> {
        MixingDistribution::from_law(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

/// Change of variables applied before Gauss–Legendre integration of a piece.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum VariableChange {
    Identity,
    /// `t = lo + (hi-lo) v^k` for `v` in `[0, 1]`; with `k = 2` this removes an
    /// inverse-square-root singularity at `lo`.
    PowerAtLower(f64),
    /// `t = hi - (hi-lo) v^k`; same at `hi`.
    PowerAtUpper(f64),
}

pub type Density = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `v -> (t, weight)` for `v` in `[0, 1]`: a law written as the image of a
/// weighted unit interval.
pub type Pushforward = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

/// Absolutely continuous part of a mixing law on `[lo, hi]`.
#[derive(Clone)]
pub struct DensityPiece {
    pub lo: f64,
    pub hi: f64,
    pub density: Density,
    pub nodes: usize,
    pub change: VariableChange,
    /// When set, replaces `density` and `change`.
    pub pushforward: Option<Pushforward>,
}

impl fmt::Debug for DensityPiece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityPiece")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("nodes", &self.nodes)
            .field("change", &self.change)
            .field("pushforward", &self.pushforward.is_some())
            .finish()
    }
}

impl DensityPiece {
    pub fn new(lo: f64, hi: f64, density: Density) -> Self {
        DensityPiece {
            lo,
            hi,
            density,
            nodes: DEFAULT_PIECE_NODES,
            change: VariableChange::Identity,
            pushforward: None,
        }
    }

    pub fn pushforward(lo: f64, hi: f64, map: Pushforward) -> Self {
        DensityPiece {
            pushforward: Some(map),
            ..DensityPiece::new(lo, hi, Arc::new(|_| 0.0))
        }
    }

    pub fn with_change(mut self, change: VariableChange) -> Self {
        self.change = change;
        self
    }

    /// Maps `v` in `[0, 1]` to `(t, weight)`.
    fn map(&self, v: f64) -> (f64, f64) {
        if let Some(f) = &self.pushforward {
            return f(v);
        }
        let width = self.hi - self.lo;
        let (t, jac) = match self.change {
            VariableChange::Identity => (self.lo + width * v, width),
            VariableChange::PowerAtLower(k) => (self.lo + width * v.powf(k), width * k * v.powf(k - 1.0)),
            VariableChange::PowerAtUpper(k) => (self.hi - width * v.powf(k), width * k * v.powf(k - 1.0)),
        };
        (t, jac * (self.density)(t))
    }

    /// Composite Gauss–Legendre nodes in `v`, graded geometrically toward the
    /// end that maps to `t = 0` (where σ integrands are sharpest at large s).
    fn quadrature_nodes(&self) -> Vec<(f64, f64)> {
        let mut cuts = vec![0.0, 1.0];
        if self.lo == 0.0 {
            let inner: Vec<f64> = (1..=GRADED_PANELS).map(|j| 0.5f64.powi(j as i32)).collect();
            if self.map(0.0).0 == self.lo {
                cuts.extend(inner);
            } else {
                cuts.extend(inner.iter().map(|x| 1.0 - x));
            }
            cuts.sort_by(f64::total_cmp);
        }
        let per_panel = if cuts.len() > 2 { self.nodes.div_ceil(2).max(8) } else { self.nodes };
        let rule = GaussLegendre::cached(per_panel);
        let mut out = Vec::with_capacity(per_panel * (cuts.len() - 1));
        for w in cuts.windows(2) {
            for (v, wv) in rule.mapped(w[0], w[1]) {
                let (t, weight) = self.map(v);
                out.push((t, wv * weight));
            }
        }
        out
    }
}

/// A nonnegative law represented by atoms plus quadrature nodes.
#[derive(Debug, Clone)]
pub struct MixingDistribution {
    law: Option<MixingLaw>,
    atoms: Vec<Atom>,
    pieces: Vec<DensityPiece>,
    nodes: Vec<(f64, f64)>,
    m1: f64,
    m2: f64,
    t_max: f64,
    truncated_mass: f64,
}

impl MixingDistribution {
    /// Builds a law from atoms, density pieces and its declared moments.
    ///
    /// Fails when the total mass or the declared moments disagree with the
    /// quadrature values (1e-10 absolute on mass, 1e-8 relative on moments).
    pub fn from_parts(
        atoms: Vec<Atom>,
        pieces: Vec<DensityPiece>,
        declared: Option<(f64, f64)>,
        truncated_mass: f64,
    ) -> Result<Self> {
        for a in &atoms {
            if !(a.location.is_finite() && a.location >= 0.0) {
                return Err(Error::domain(format!("atom location must be >= 0, got {}", a.location)));
            }
            if !(a.mass > 0.0 && a.mass <= 1.0) {
                return Err(Error::domain(format!("atom mass must lie in (0, 1], got {}", a.mass)));
            }
        }
        for p in &pieces {
            if !(p.lo >= 0.0 && p.hi > p.lo && p.hi.is_finite()) {
                return Err(Error::domain(format!(
                    "density piece needs 0 <= lo < hi < inf, got [{}, {}]",
                    p.lo, p.hi
                )));
            }
        }
        let nodes: Vec<(f64, f64)> = pieces.iter().flat_map(|p| p.quadrature_nodes()).collect();
        let t_max = atoms
            .iter()
            .map(|a| a.location)
            .chain(pieces.iter().map(|p| p.hi))
            .fold(0.0, f64::max);
        let mut mix = MixingDistribution {
            law: None,
            atoms,
            pieces,
            nodes,
            m1: 0.0,
            m2: 0.0,
            t_max,
            truncated_mass,
        };
        let mass = mix.expect(|_| 1.0) + truncated_mass;
        if (mass - 1.0).abs() > 1e-10 {
            return Err(Error::domain(format!("total mass {mass} differs from 1")));
        }
        let (q1, q2) = mix.quadrature_moments();
        let (m1, m2) = declared.unwrap_or((q1, q2));
        let rel = |a: f64, b: f64| (a - b).abs() <= 1e-8 * b.abs().max(1e-300) || a == b;
        if !rel(q1, m1) || !rel(q2, m2) {
            return Err(Error::domain(format!(
                "declared moments ({m1}, {m2}) disagree with quadrature ({q1}, {q2})"
            )));
        }
        mix.m1 = m1;
        mix.m2 = m2;
        Ok(mix)
    }

    pub fn from_law(law: &MixingLaw) -> Result<Self> {
        let unit = |v: f64, what: &str| -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::domain(format!("{what} must be positive, got {v}")))
            }
        };
        let mut mix = match *law {
            MixingLaw::Atom(loc, mass) => MixingDistribution::from_parts(
                vec![Atom { location: loc, mass }],
                vec![],
                Some((loc * mass, loc * loc * mass)),
                0.0,
            )?,
            MixingLaw::Atoms(ref list) => {
                let atoms: Vec<Atom> = list.iter().map(|&(location, mass)| Atom { location, mass }).collect();
                let m1 = atoms.iter().map(|a| a.mass * a.location).sum();
                let m2 = atoms.iter().map(|a| a.mass * a.location * a.location).sum();
                MixingDistribution::from_parts(atoms, vec![], Some((m1, m2)), 0.0)?
            }
            MixingLaw::Uniform(lo, hi) => {
                if !(lo >= 0.0 && hi >= lo && hi.is_finite()) {
                    return Err(Error::domain(format!("uniform needs 0 <= lo <= hi, got [{lo}, {hi}]")));
                }
                let m1 = 0.5 * (lo + hi);
                let m2 = (lo * lo + lo * hi + hi * hi) / 3.0;
                if hi == lo {
                    MixingDistribution::from_parts(vec![Atom { location: lo, mass: 1.0 }], vec![], Some((m1, m2)), 0.0)?
                } else {
                    let h = 1.0 / (hi - lo);
                    MixingDistribution::from_parts(
                        vec![],
                        vec![DensityPiece::new(lo, hi, Arc::new(move |_| h))],
                        Some((m1, m2)),
                        0.0,
                    )?
                }
            }
            MixingLaw::BetaTail(a) => {
                unit(a, "beta_tail parameter")?;
                let piece = if a.fract() == 0.0 {
                    DensityPiece::new(0.0, 1.0, Arc::new(move |x: f64| a * (1.0 - x).powf(a - 1.0)))
                } else {
                    // t = 1 - v^k carries weight a k v^{ak-1}, smooth enough once ak >= 4
                    let k = (4.0 / a).ceil().max(2.0);
                    DensityPiece::pushforward(
                        0.0,
                        1.0,
                        Arc::new(move |v: f64| (1.0 - v.powf(k), a * k * v.powf(a * k - 1.0))),
                    )
                };
                let m1 = 1.0 / (a + 1.0);
                let m2 = 2.0 / ((a + 1.0) * (a + 2.0));
                MixingDistribution::from_parts(vec![], vec![piece], Some((m1, m2)), 0.0)?
            }
            MixingLaw::Example2d => {
                let piece = DensityPiece::new(0.0, 1.0, Arc::new(|t: f64| 1.0 / t.sqrt() - 1.0))
                    .with_change(VariableChange::PowerAtLower(2.0));
                MixingDistribution::from_parts(vec![], vec![piece], Some((1.0 / 6.0, 1.0 / 15.0)), 0.0)?
            }
            MixingLaw::USquared => {
                let piece = DensityPiece::new(0.0, 1.0, Arc::new(|t: f64| 0.5 / t.sqrt()))
                    .with_change(VariableChange::PowerAtLower(2.0));
                MixingDistribution::from_parts(vec![], vec![piece], Some((1.0 / 3.0, 0.2)), 0.0)?
            }
            MixingLaw::Exp(mu) => {
                unit(mu, "exp mean")?;
                let top = -mu * TRUNCATION_TAIL.ln();
                let mut pieces = Vec::new();
                let mut lo = 0.0;
                let mut hi = 0.25 * mu;
                while lo < top {
                    let h = hi.min(top);
                    pieces.push(DensityPiece::new(lo, h, Arc::new(move |t: f64| (-t / mu).exp() / mu)));
                    lo = h;
                    hi = 2.0 * h;
                }
                MixingDistribution::from_parts(vec![], pieces, Some((mu, 2.0 * mu * mu)), TRUNCATION_TAIL)?
            }
        };
        mix.law = Some(law.clone());
        Ok(mix)
    }

    pub fn law(&self) -> Option<&MixingLaw> {
        self.law.as_ref()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn pieces(&self) -> &[DensityPiece] {
        &self.pieces
    }

    /// Support bound of the (possibly truncated) law.
    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn truncated_mass(&self) -> f64 {
        self.truncated_mass
    }

    /// Declared `(E[X], E[X^2])`.
    pub fn moments(&self) -> (f64, f64) {
        (self.m1, self.m2)
    }

    pub fn variance(&self) -> f64 {
        (self.m2 - self.m1 * self.m1).max(0.0)
    }

    /// Moments computed from atoms and quadrature nodes.
    pub fn quadrature_moments(&self) -> (f64, f64) {
        (self.expect(|t| t), self.expect(|t| t * t))
    }

    pub fn total_mass(&self) -> f64 {
        self.expect(|_| 1.0)
    }

    /// `E[g(X)]` over atoms and quadrature nodes.
    pub fn expect<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.mass * g(a.location)).sum();
        let cont: f64 = self.nodes.iter().map(|&(t, w)| w * g(t)).sum();
        atoms + cont
    }

    /// Fallible variant of [`MixingDistribution::expect`].
    pub fn try_expect<G: Fn(f64) -> Result<f64>>(&self, g: G) -> Result<f64> {
        let mut total = 0.0;
        for a in &self.atoms {
            total += a.mass * g(a.location)?;
        }
        for &(t, w) in &self.nodes {
            total += w * g(t)?;
        }
        Ok(total)
    }

    /// LS-transform `E[exp(-s X)]`; exact for exponential laws, quadrature otherwise.
    pub fn transform(&self, s: f64) -> f64 {
        match self.law {
            Some(MixingLaw::Exp(mu)) => 1.0 / (1.0 + mu * s),
            _ => self.expect(|t| (-s * t).exp()),
        }
    }

    /// `1 - E[exp(-s X)]`, accurate for small `s`.
    pub fn transform_complement(&self, s: f64) -> f64 {
        match self.law {
            Some(MixingLaw::Exp(mu)) => mu * s / (1.0 + mu * s),
            _ => self.expect(|t| -(-s * t).exp_m1()),
        }
    }

    /// Distribution function at `x`, from the law descriptor.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        let law = self
            .law
            .as_ref()
            .ok_or_else(|| Error::capability("mixing", "cdf of a law built from raw parts"))?;
        let v = match *law {
            MixingLaw::Atom(loc, mass) => {
                if x >= loc {
                    mass
                } else {
                    0.0
                }
            }
            MixingLaw::Atoms(ref list) => list.iter().filter(|(l, _)| *l <= x).map(|(_, m)| m).sum(),
            MixingLaw::Uniform(lo, hi) => {
                if x >= hi {
                    1.0
                } else if x < lo {
                    0.0
                } else {
                    (x - lo) / (hi - lo)
                }
            }
            MixingLaw::BetaTail(a) => 1.0 - (1.0 - x.clamp(0.0, 1.0)).powf(a),
            MixingLaw::Example2d => {
                let x = x.clamp(0.0, 1.0);
                2.0 * x.sqrt() - x
            }
            MixingLaw::USquared => x.clamp(0.0, 1.0).sqrt(),
            MixingLaw::Exp(mu) => 1.0 - (-x.max(0.0) / mu).exp(),
        };
        Ok(v)
    }
}

/// σ integrand `(1 - F(ts))/t` with its limit `mu s` at `t = 0`; `complement`
/// evaluates `1 - F`.
fn sigma_integrand<E>(complement: &E, mu: f64, m2: Option<f64>, t: f64, s: f64) -> Result<f64>
where
    E: Fn(f64) -> Result<f64>,
{
    let x = t * s;
    if x < SMALL_ARGUMENT {
        return Ok(match m2 {
            Some(m2) => mu * s * (1.0 - x * m2 / (2.0 * mu)),
            None => mu * s,
        });
    }
    Ok(complement(x)? / t)
}

/// σ(s) for any evaluator of `1 - F` with mean `mu`.
pub(crate) fn sigma_with<E>(complement: E, mu: f64, m2: Option<f64>, mix: &MixingDistribution, s: f64) -> Result<f64>
where
    E: Fn(f64) -> Result<f64>,
{
    if s == 0.0 {
        return Ok(0.0);
    }
    mix.try_expect(|t| sigma_integrand(&complement, mu, m2, t, s))
}

fn known_mean(fhat: &Transform) -> Result<f64> {
    match fhat.mean() {
        Some(m) if m.is_finite() && m > 0.0 => Ok(m),
        _ => Err(Error::Contract("σ needs a transform with known positive mean".into())),
    }
}

fn check_reach(fhat: &Transform, mix: &MixingDistribution, s: f64) -> Result<()> {
    if !(s >= 0.0) {
        return Err(Error::domain(format!("σ argument must be nonnegative, got {s}")));
    }
    let reach = s * mix.t_max();
    let hi = fhat.domain_limit();
    if reach > hi * (1.0 + 1e-12) {
        return Err(Error::Range { s: reach, lo: 0.0, hi });
    }
    Ok(())
}

/// `σ(s) = ∫ (1 - F(ts))/t dF_T(t)`, with the `t = 0` atom contributing `mass · mu · s`.
pub fn sigma(fhat: &Transform, f_t: &MixingDistribution, s: f64) -> Result<f64> {
    let mu = known_mean(fhat)?;
    check_reach(fhat, f_t, s)?;
    sigma_with(|x| fhat.complement(x), mu, fhat.second_moment(), f_t, s)
}

/// `σ_B(x) = ∫_0^x F_B(t) dt`.
///
/// Atoms integrate in closed form; the continuous part uses adaptive
/// Gauss–Kronrod quadrature.
pub fn sigma_b(f_b: &MixingDistribution, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain(format!("σ_B argument must be nonnegative, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let atoms: f64 = f_b
        .atoms
        .iter()
        .map(|a| {
            let b = a.location;
            if b * x < 1e-12 {
                a.mass * x * (1.0 - 0.5 * b * x)
            } else {
                a.mass * -(-b * x).exp_m1() / b
            }
        })
        .sum();
    if f_b.nodes.is_empty() {
        return Ok(atoms);
    }
    let cont = |u: f64| f_b.nodes.iter().map(|&(t, w)| w * (-t * u).exp()).sum::<f64>();
    let (v, _) = quadrature::adaptive(cont, 0.0, x, 1e-14 * x.max(1.0), 1e-13);
    Ok(atoms + v)
}

/// `σ*(s) = ∫_0^s mu E[F(x T)] dx`.
pub fn sigma_star(fhat: &Transform, f_t: &MixingDistribution, s: f64) -> Result<f64> {
    let mu = known_mean(fhat)?;
    check_reach(fhat, f_t, s)?;
    if s == 0.0 {
        return Ok(0.0);
    }
    sigma_star_segment(fhat, f_t, mu, 0.0, s)
}

fn sigma_star_segment(fhat: &Transform, f_t: &MixingDistribution, mu: f64, a: f64, b: f64) -> Result<f64> {
    let failure = std::cell::Cell::new(None);
    let inner = |x: f64| match f_t.try_expect(|t| fhat.eval(x * t)) {
        Ok(v) => mu * v,
        Err(e) => {
            failure.set(Some(e));
            0.0
        }
    };
    let (v, _) = quadrature::adaptive(inner, a, b, 1e-13 * (b - a).max(1.0), 1e-13);
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// σ* at every point of an increasing grid, accumulated segment by segment.
pub fn sigma_star_on_grid(fhat: &Transform, f_t: &MixingDistribution, grid: &[f64]) -> Result<Vec<f64>> {
    let mu = known_mean(fhat)?;
    if let Some(&last) = grid.last() {
        check_reach(fhat, f_t, last)?;
    }
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    let mut prev = 0.0;
    for &s in grid {
        if s < prev {
            return Err(Error::domain("σ* grid must be nondecreasing"));
        }
        if s > prev {
            acc += sigma_star_segment(fhat, f_t, mu, prev, s)?;
        }
        out.push(acc);
        prev = s;
    }
    Ok(out)
}

/// The Bernstein function σ attached to one source transform and mixing law.
#[derive(Debug, Clone)]
pub struct BernsteinEval {
    pub source: Transform,
    pub mixing: MixingDistribution,
    pub mu: f64,
}

/// Shape check of a sampled Bernstein function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BernsteinShape {
    pub value_at_zero: f64,
    pub worst_decrease: f64,
    pub worst_convexity: f64,
}

impl BernsteinEval {
    pub fn new(source: Transform, mixing: MixingDistribution) -> Result<Self> {
        let mu = known_mean(&source)?;
        Ok(BernsteinEval { source, mixing, mu })
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        sigma(&self.source, &self.mixing, s)
    }

    /// Worst violations of `σ(0)=0`, monotonicity and concavity on `grid`.
    pub fn shape_on(&self, grid: &[f64]) -> Result<BernsteinShape> {
        let v = grid.iter().map(|&s| self.eval(s)).collect::<Result<Vec<_>>>()?;
        Ok(shape_of(grid, &v, self.eval(0.0)?))
    }
}

pub(crate) fn shape_of(grid: &[f64], v: &[f64], at_zero: f64) -> BernsteinShape {
    let worst_decrease = v.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
    let mut worst_convexity = 0.0f64;
    for i in 1..v.len().saturating_sub(1) {
        let left = (v[i] - v[i - 1]) / (grid[i] - grid[i - 1]);
        let right = (v[i + 1] - v[i]) / (grid[i + 1] - grid[i]);
        // slope increase, rescaled to the value scale
        let excess = (right - left) * (grid[i + 1] - grid[i - 1]);
        worst_convexity = worst_convexity.max(excess);
    }
    BernsteinShape {
        value_at_zero: at_zero,
        worst_decrease,
        worst_convexity,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::{log_grid, CatalogEntry};
    use proptest::prelude::*;

    fn exp_t(mu: f64) -> Transform {
        CatalogEntry::Exponential { mu }.into()
    }

    #[test]
    fn every_law_has_unit_mass_and_matching_moments() {
        let laws = [
            MixingLaw::point(0.0),
            MixingLaw::point(0.4),
            MixingLaw::Atoms(vec![(0.0, 0.25), (0.5, 0.75)]),
            MixingLaw::Uniform(0.0, 1.0),
            MixingLaw::Uniform(0.5, 1.0),
            MixingLaw::BetaTail(2.0),
            MixingLaw::BetaTail(0.5),
            MixingLaw::Example2d,
            MixingLaw::USquared,
            MixingLaw::Exp(1.0),
        ];
        for law in &laws {
            let m = law.build().unwrap();
            assert!((m.total_mass() + m.truncated_mass() - 1.0).abs() < 1e-10, "{law:?}");
            let (q1, q2) = m.quadrature_moments();
            let (d1, d2) = m.moments();
            assert!((q1 - d1).abs() <= 1e-8 * d1.max(1e-300), "{law:?}");
            assert!((q2 - d2).abs() <= 1e-8 * d2.max(1e-300), "{law:?}");
        }
    }

    #[test]
    fn moments_of_examples() {
        assert_eq!(MixingLaw::point(0.3).build().unwrap().moments(), (0.3, 0.3 * 0.3));
        let u = MixingLaw::Uniform(0.0, 1.0).build().unwrap().moments();
        assert!((u.0 - 0.5).abs() < 1e-15 && (u.1 - 1.0 / 3.0).abs() < 1e-15);
        // oracle: direct Riemann sum of x·2(1-x) and x²·2(1-x)
        let n = 200_000;
        let h = 1.0 / n as f64;
        let (mut o1, mut o2) = (0.0, 0.0);
        for i in 0..n {
            let x = (i as f64 + 0.5) * h;
            o1 += x * 2.0 * (1.0 - x) * h;
            o2 += x * x * 2.0 * (1.0 - x) * h;
        }
        let b = MixingLaw::BetaTail(2.0).build().unwrap().moments();
        assert!((b.0 - o1).abs() < 1e-9 && (b.1 - o2).abs() < 1e-9);
        assert!((b.0 - 1.0 / 3.0).abs() < 1e-15 && (b.1 - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn inconsistent_parts_are_rejected() {
        let half = Atom { location: 1.0, mass: 0.5 };
        assert!(MixingDistribution::from_parts(vec![half], vec![], None, 0.0).is_err());
        let full = Atom { location: 1.0, mass: 1.0 };
        assert!(MixingDistribution::from_parts(vec![full], vec![], Some((2.0, 4.0)), 0.0).is_err());
        assert!(MixingLaw::Uniform(1.0, 0.5).build().is_err());
        assert!(MixingLaw::point(-1.0).build().is_err());
    }

    #[test]
    fn sigma_with_atom_at_zero_is_linear() {
        let m = MixingLaw::point(0.0).build().unwrap();
        for s in [0.0, 0.1, 3.0, 40.0] {
            let v = sigma(&exp_t(2.0), &m, s).unwrap();
            assert!((v - 2.0 * s).abs() < 1e-14);
        }
    }

    #[test]
    fn sigma_with_atom_at_p() {
        let p = 0.3;
        let m = MixingLaw::point(p).build().unwrap();
        let f = exp_t(1.5);
        for s in [0.2, 1.0, 10.0] {
            let expected = (1.0 - f.eval(p * s).unwrap()) / p;
            assert!((sigma(&f, &m, s).unwrap() - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn sigma_uniform_exponential_is_log() {
        let m = MixingLaw::Uniform(0.0, 1.0).build().unwrap();
        for mu in [0.5, 1.0, 3.0] {
            for s in [1e-7, 0.01, 1.0, 2.0, 50.0] {
                let v = sigma(&exp_t(mu), &m, s).unwrap();
                let expected = (mu * s).ln_1p();
                assert!((v - expected).abs() < 1e-12 * expected.max(1e-4), "mu {mu}, s {s}: {v} vs {expected}");
            }
        }
        // mpmath reference for mu = 3, s = 2
        assert!((sigma(&exp_t(3.0), &m, 2.0).unwrap() - 1.945_910_149_055_313_3).abs() < 1e-13);
    }

    #[test]
    fn sigma_needs_mean_and_range() {
        let m = MixingLaw::Uniform(0.0, 2.0).build().unwrap();
        let g = crate::grid::GridTransform::new(vec![0.0, 1.0, 2.0], vec![1.0, 0.6, 0.4], Some(1.0)).unwrap();
        let g = Transform::from(g);
        assert!(matches!(sigma(&g, &m, 1.5), Err(Error::Range { .. })));
        assert!(sigma(&g, &m, 1.0).is_ok());
        let no_mean = crate::grid::GridTransform::new(vec![0.0, 1.0], vec![1.0, 0.5], None).unwrap();
        assert!(matches!(
            sigma(&Transform::from(no_mean), &m, 0.1),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn sigma_b_examples() {
        let zero = MixingLaw::point(0.0).build().unwrap();
        let one = MixingLaw::point(1.0).build().unwrap();
        for x in [0.0, 0.5, 3.0] {
            assert!((sigma_b(&zero, x).unwrap() - x).abs() < 1e-15);
            assert!((sigma_b(&one, x).unwrap() - (1.0 - (-x).exp())).abs() < 1e-15);
        }
        // continuous B against the Fubini form E[(1 - e^{-Bx})/B]
        let u = MixingLaw::Uniform(0.0, 2.0).build().unwrap();
        for x in [0.3, 4.0, 25.0] {
            let fubini = u.expect(|b| if b * x < 1e-12 { x } else { -(-b * x).exp_m1() / b });
            assert!((sigma_b(&u, x).unwrap() - fubini).abs() < 1e-11);
        }
    }

    #[test]
    fn sigma_star_examples() {
        let f = CatalogEntry::Degenerate { c: 1.3 }.into();
        let zero = MixingLaw::point(0.0).build().unwrap();
        let one = MixingLaw::point(1.0).build().unwrap();
        for s in [0.0, 0.7, 5.0] {
            assert!((sigma_star(&f, &zero, s).unwrap() - 1.3 * s).abs() < 1e-12);
            assert!((sigma_star(&f, &one, s).unwrap() - (1.0 - (-1.3 * s).exp())).abs() < 1e-12);
        }
    }

    #[test]
    fn sigma_star_matches_log_for_cosh_squared() {
        let mu = 1.0;
        let f = Transform::scaled(CatalogEntry::CoshFamily { t: 2.0 }.into(), mu / 2.0).unwrap();
        let m = MixingLaw::USquared.build().unwrap();
        // mpmath reference at s = 2
        assert!((sigma_star(&f, &m, 2.0).unwrap() - 1.556_982_597_115_339_5).abs() < 1e-10);
        let grid = log_grid(1e-4, 50.0, 64);
        let acc = sigma_star_on_grid(&f, &m, &grid).unwrap();
        for (s, v) in grid.iter().zip(&acc) {
            let target = -f.eval(*s).unwrap().ln();
            assert!((v - target).abs() < 1e-7, "s {s}: {v} vs {target}");
        }
    }

    #[test]
    fn cdf_values() {
        let e = MixingLaw::Example2d.build().unwrap();
        assert!((e.cdf(0.25).unwrap() - 0.75).abs() < 1e-15);
        let u = MixingLaw::Uniform(0.0, 1.0).build().unwrap();
        assert_eq!(u.cdf(0.5).unwrap(), 0.5);
        let raw = MixingDistribution::from_parts(vec![Atom { location: 0.0, mass: 1.0 }], vec![], None, 0.0).unwrap();
        assert!(raw.cdf(0.5).is_err());
    }

    #[test]
    fn bernstein_shape_of_sigma() {
        let m = MixingLaw::BetaTail(2.0).build().unwrap();
        let b = BernsteinEval::new(CatalogEntry::Gamma { a: 2.0, b: 0.5 }.into(), m).unwrap();
        let grid = log_grid(1e-5, 50.0, 200);
        let shape = b.shape_on(&grid).unwrap();
        assert_eq!(shape.value_at_zero, 0.0);
        assert!(shape.worst_decrease <= 0.0);
        assert!(shape.worst_convexity <= 1e-12);
        // σ(s)/s -> mu as s -> 0
        let slope = b.eval(1e-9).unwrap() / 1e-9;
        assert!((slope - 1.0).abs() < 1e-6);
    }

    #[test]
    fn composition_sigma_b_after_sigma_is_concave() {
        let t = MixingLaw::Uniform(0.0, 1.0).build().unwrap();
        let bl = MixingLaw::Exp(0.5).build().unwrap();
        let f = exp_t(1.0);
        let grid = log_grid(1e-4, 50.0, 120);
        let v: Vec<f64> = grid
            .iter()
            .map(|&s| sigma_b(&bl, sigma(&f, &t, s).unwrap()).unwrap())
            .collect();
        let shape = shape_of(&grid, &v, 0.0);
        assert!(shape.worst_decrease <= 0.0);
        assert!(shape.worst_convexity <= 1e-10, "{shape:?}");
    }

    #[test]
    fn serde_forms() {
        let parse = |s: &str| serde_json::from_str::<MixingLaw>(s).unwrap();
        assert_eq!(parse(r#"{"atom": [0.5, 1.0]}"#), MixingLaw::Atom(0.5, 1.0));
        assert_eq!(parse(r#"{"uniform": [0, 1]}"#), MixingLaw::Uniform(0.0, 1.0));
        assert_eq!(parse(r#"{"beta_tail": 2}"#), MixingLaw::BetaTail(2.0));
        assert_eq!(parse(r#""example2d""#), MixingLaw::Example2d);
        assert_eq!(parse(r#"{"example2d": null}"#), MixingLaw::Example2d);
        assert_eq!(parse(r#""usquared""#), MixingLaw::USquared);
        assert_eq!(parse(r#"{"exp": 2.5}"#), MixingLaw::Exp(2.5));
    }

    proptest! {
        #[test]
        fn log_map_is_one_lipschitz(a in 0.0f64..100.0, b in 0.0f64..100.0) {
            prop_assert!((a.ln_1p() - b.ln_1p()).abs() <= (a - b).abs() + 1e-15);
        }

        #[test]
        fn sigma_slope_at_zero_is_mean(mu in 0.1f64..10.0, a in 0.5f64..5.0) {
            let m = MixingLaw::BetaTail(a).build().unwrap();
            let f = Transform::from(CatalogEntry::Gamma { a: 2.0, b: mu / 2.0 });
            let s = 1e-7 / mu;
            let slope = sigma(&f, &m, s).unwrap() / s;
            prop_assert!((slope - mu).abs() <= 1e-6 * mu);
        }
    }
}
