//! Monte Carlo checks of the distributional equations behind the functional
//! equations, compared through empirical transforms.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::law::{stream, Law};
use crate::moments::{equilibrium, length_biased};
use crate::quadrature::CompensatedSum;

/// Which distributional equation to check; `Z` is length-biased and `X*`
/// the equilibrium law of the solution `F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equation {
    /// `Z = X1 + X2 + T Z'`
    Example1,
    /// `Z = X + T Z'`
    Example2,
    /// `X* = X + T X*'`
    Example3,
    /// `Z = X1 + T X2`
    Remark4,
}

impl Equation {
    pub fn describe(&self) -> &'static str {
        match self {
            Equation::Example1 => "Z = X1 + X2 + T Z'",
            Equation::Example2 => "Z = X + T Z'",
            Equation::Example3 => "X* = X + T X*'",
            Equation::Remark4 => "Z = X1 + T X2",
        }
    }
}

pub const MIN_SAMPLES: usize = 10_000;
pub const DEFAULT_RESAMPLES: usize = 200;
pub const DEFAULT_CHUNKS: usize = 1000;
pub const GRID_POINTS: usize = 16;
pub const QUANTILE: f64 = 0.99;

// stream roles
const LHS: u64 = 0;
const X1: u64 = 1;
const X2: u64 = 2;
const T: u64 = 3;
const Z_PRIME: u64 = 4;
const BOOTSTRAP: u64 = 5;

fn default_resamples() -> usize {
    DEFAULT_RESAMPLES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationSpec {
    pub equation: Equation,
    /// Candidate solution `F`.
    pub solution: Law,
    #[serde(rename = "T")]
    pub t: Law,
    pub n: usize,
    pub seed: u64,
    /// Comparison points; defaults to 16 geometric points on `[0.1/mu, 10/mu]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    #[serde(default = "default_resamples")]
    pub resamples: usize,
}

impl EquationSpec {
    pub fn new(equation: Equation, solution: Law, t: Law, n: usize, seed: u64) -> Self {
        EquationSpec {
            equation,
            solution,
            t,
            n,
            seed,
            grid: None,
            resamples: DEFAULT_RESAMPLES,
        }
    }

    fn mean(&self) -> Result<f64> {
        self.solution
            .mean()
            .filter(|m| m.is_finite() && *m > 0.0)
            .ok_or_else(|| Error::domain("the candidate solution needs a finite positive mean"))
    }

    /// Comparison grid, validated.
    pub fn comparison_grid(&self) -> Result<Vec<f64>> {
        let mu = self.mean()?;
        let grid = match &self.grid {
            Some(g) => g.clone(),
            None => crate::transforms::log_grid(0.1 / mu, 10.0 / mu, GRID_POINTS),
        };
        let top = 10.0 / mu * (1.0 + 1e-12);
        if grid.is_empty() || grid.iter().any(|s| !(*s >= 0.0 && *s <= top)) {
            return Err(Error::domain(format!("comparison grid must lie in [0, {}]", 10.0 / mu)));
        }
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < MIN_SAMPLES {
            return Err(Error::domain(format!("need n >= {MIN_SAMPLES}, got {}", self.n)));
        }
        if self.resamples < 10 {
            return Err(Error::domain("need at least 10 bootstrap resamples"));
        }
        self.solution.validate()?;
        self.t.validate()?;
        self.comparison_grid()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub equation: Equation,
    pub n: usize,
    pub seed: u64,
    pub grid: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub gaps: Vec<f64>,
    /// `max |lhs - rhs|` over the grid.
    pub gap: f64,
    pub gap_at: f64,
    /// 99% quantile of the centered bootstrap gap.
    pub threshold: f64,
    pub resamples: usize,
    pub passed: bool,
}

/// `n` draws from `law`, split into deterministic per-chunk streams.
pub fn sample_law(law: &Law, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::domain("need at least one draw"));
    }
    law.validate()?;
    let chunks = chunk_sizes(n);
    let parts: Vec<Vec<f64>> = chunks
        .par_iter()
        .enumerate()
        .map(|(c, &len)| law.sample_n(len, &mut stream(seed, LHS, c as u64)))
        .collect();
    Ok(parts.concat())
}

fn chunk_sizes(n: usize) -> Vec<usize> {
    let k = DEFAULT_CHUNKS.min(n.div_ceil(10)).max(1);
    let (base, extra) = (n / k, n % k);
    (0..k).map(|i| base + usize::from(i < extra)).collect()
}

/// Laws entering the two sides, resolved once.
struct Sides {
    lhs: Law,
    rhs: Rhs,
}

enum Rhs {
    /// `X1 + X2 + T Z'`
    TwoPlusScaled { x: Law, z: Law },
    /// `X + T Y'`
    OnePlusScaled { x: Law, y: Law },
    /// `X1 + T X2`
    Remark4 { x: Law },
}

fn sides(spec: &EquationSpec) -> Result<Sides> {
    let mu = spec.mean()?;
    let f = spec.solution.clone();
    let s = match spec.equation {
        Equation::Example1 => {
            let z = length_biased(&f, mu)?;
            Sides { lhs: z.clone(), rhs: Rhs::TwoPlusScaled { x: f, z } }
        }
        Equation::Example2 => {
            let z = length_biased(&f, mu)?;
            Sides { lhs: z.clone(), rhs: Rhs::OnePlusScaled { x: f, y: z } }
        }
        Equation::Example3 => {
            let star = equilibrium(&f, mu)?;
            // sampling the equilibrium law goes through its length-biased law
            if let Law::Equilibrium { base } = &star {
                crate::law::length_biased_law(base)?;
            }
            Sides { lhs: star.clone(), rhs: Rhs::OnePlusScaled { x: f, y: star } }
        }
        Equation::Remark4 => Sides {
            lhs: length_biased(&f, mu)?,
            rhs: Rhs::Remark4 { x: f },
        },
    };
    Ok(s)
}

/// Per-chunk sums of `exp(-s x)` for both sides.
struct ChunkSums {
    count: usize,
    lhs: Vec<f64>,
    rhs: Vec<f64>,
}

fn chunk_sums(spec: &EquationSpec, sides: &Sides, grid: &[f64], c: usize, len: usize) -> ChunkSums {
    let chunk = c as u64;
    let mut lhs_rng = stream(spec.seed, LHS, chunk);
    let mut x1 = stream(spec.seed, X1, chunk);
    let mut x2 = stream(spec.seed, X2, chunk);
    let mut t = stream(spec.seed, T, chunk);
    let mut zp = stream(spec.seed, Z_PRIME, chunk);
    let mut l = vec![CompensatedSum::default(); grid.len()];
    let mut r = vec![CompensatedSum::default(); grid.len()];
    for _ in 0..len {
        let a = sides.lhs.sample(&mut lhs_rng);
        let b = match &sides.rhs {
            Rhs::TwoPlusScaled { x, z } => x.sample(&mut x1) + x.sample(&mut x2) + spec.t.sample(&mut t) * z.sample(&mut zp),
            Rhs::OnePlusScaled { x, y } => x.sample(&mut x1) + spec.t.sample(&mut t) * y.sample(&mut zp),
            Rhs::Remark4 { x } => x.sample(&mut x1) + spec.t.sample(&mut t) * x.sample(&mut x2),
        };
        for (k, &s) in grid.iter().enumerate() {
            l[k].add((-s * a).exp());
            r[k].add((-s * b).exp());
        }
    }
    ChunkSums {
        count: len,
        lhs: l.iter().map(|x| x.value()).collect(),
        rhs: r.iter().map(|x| x.value()).collect(),
    }
}

fn pooled<'a, I>(parts: I, k: usize, pick: fn(&ChunkSums) -> &Vec<f64>) -> Vec<f64>
where
    I: Iterator<Item = &'a ChunkSums>,
{
    let mut sums = vec![CompensatedSum::default(); k];
    let mut count = 0;
    for p in parts {
        count += p.count;
        for (s, v) in sums.iter_mut().zip(pick(p)) {
            s.add(*v);
        }
    }
    sums.iter().map(|s| s.value() / count as f64).collect()
}

/// Compares the empirical transforms of both sides of the equation.
pub fn verify_equation(spec: &EquationSpec) -> Result<SimReport> {
    spec.validate()?;
    let grid = spec.comparison_grid()?;
    let sides = sides(spec)?;
    let chunks = chunk_sizes(spec.n);
    let parts: Vec<ChunkSums> = chunks
        .par_iter()
        .enumerate()
        .map(|(c, &len)| chunk_sums(spec, &sides, &grid, c, len))
        .collect();
    let k = grid.len();
    let lhs = pooled(parts.iter(), k, |p| &p.lhs);
    let rhs = pooled(parts.iter(), k, |p| &p.rhs);
    let gaps: Vec<f64> = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).collect();
    let (mut gap, mut gap_at) = (0.0f64, grid[0]);
    for (g, s) in gaps.iter().zip(&grid) {
        if *g > gap {
            gap = *g;
            gap_at = *s;
        }
    }

    // two-sample bootstrap over chunks, each side resampled on its own
    let mut rng = stream(spec.seed, BOOTSTRAP, 0);
    let m = parts.len();
    let mut stats = Vec::with_capacity(spec.resamples);
    for _ in 0..spec.resamples {
        let li: Vec<usize> = (0..m).map(|_| rng.random_range(0..m)).collect();
        let ri: Vec<usize> = (0..m).map(|_| rng.random_range(0..m)).collect();
        let lb = pooled(li.iter().map(|&i| &parts[i]), k, |p| &p.lhs);
        let rb = pooled(ri.iter().map(|&i| &parts[i]), k, |p| &p.rhs);
        let stat = (0..k)
            .map(|j| ((lb[j] - rb[j]) - (lhs[j] - rhs[j])).abs())
            .fold(0.0, f64::max);
        stats.push(stat);
    }
    stats.sort_by(f64::total_cmp);
    let idx = ((QUANTILE * stats.len() as f64).ceil() as usize).clamp(1, stats.len()) - 1;
    let threshold = stats[idx].max(f64::MIN_POSITIVE);
    Ok(SimReport {
        equation: spec.equation,
        n: spec.n,
        seed: spec.seed,
        grid,
        lhs,
        rhs,
        gaps,
        gap,
        gap_at,
        threshold,
        resamples: spec.resamples,
        passed: gap <= threshold,
    })
}
