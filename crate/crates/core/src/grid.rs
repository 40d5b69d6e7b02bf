//! Discretized transforms: a log-spaced s-grid and transforms sampled on it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;

/// Layout of the solver grid.
///
/// Nodes are `0` followed by `nodes` log-spaced points on `[s_min, s_max]`;
/// when `t_max > 1` the same spacing continues up to `s_max · t_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub s_min: f64,
    pub s_max: f64,
    pub nodes: usize,
    pub t_max: f64,
}

impl GridSpec {
    pub const DEFAULT_NODES: usize = 512;

    /// Default layout for transforms with mean `mu`.
    pub fn for_mean(mu: f64) -> Self {
        GridSpec {
            s_min: 1e-6 / mu,
            s_max: 50.0 / mu,
            nodes: Self::DEFAULT_NODES,
            t_max: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s_min > 0.0 && self.s_max > self.s_min && self.s_max.is_finite()) {
            return Err(Error::domain(format!(
                "grid needs 0 < s_min < s_max, got [{}, {}]",
                self.s_min, self.s_max
            )));
        }
        if self.nodes < 8 {
            return Err(Error::domain(format!("grid needs at least 8 nodes, got {}", self.nodes)));
        }
        if !(self.t_max.is_finite() && self.t_max >= 0.0) {
            return Err(Error::domain(format!("t_max must be finite, got {}", self.t_max)));
        }
        Ok(())
    }

    /// All node locations, starting with `s = 0`.
    pub fn build(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let ratio = (self.s_max / self.s_min).ln() / (self.nodes - 1) as f64;
        let mut s = Vec::with_capacity(self.nodes + 1);
        s.push(0.0);
        for i in 0..self.nodes {
            s.push(self.s_min * (ratio * i as f64).exp());
        }
        *s.last_mut().expect("non-empty") = self.s_max;
        let top = self.s_max * self.t_max.max(1.0);
        let mut i = self.nodes;
        while *s.last().expect("non-empty") < top * (1.0 - 1e-12) {
            let next = self.s_min * (ratio * i as f64).exp();
            s.push(next.min(top));
            i += 1;
        }
        Ok(s)
    }

    /// Number of leading nodes (including `s = 0`) that lie in `[0, s_max]`.
    pub fn core_len(&self) -> usize {
        self.nodes + 1
    }
}

#[derive(Serialize, Deserialize)]
struct GridTransformData {
    nodes: Vec<f64>,
    values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    complement: Option<Vec<f64>>,
    mean: Option<f64>,
    second_moment: Option<f64>,
}

/// A transform sampled on a fixed grid.
///
/// The grid stores `1 - F` at the nodes and interpolates `log H(s)`,
/// `H(s) = (1 - F(s))/s`, with a monotone cubic in `log(1+s)`; `H(0)` is the
/// mean when known. This keeps full relative precision in `1 - F` near
/// `s = 0`, where the mean lives. Between nodes the result is clamped to the
/// neighboring node values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridTransformData", into = "GridTransformData")]
pub struct GridTransform {
    nodes: Vec<f64>,
    values: Vec<f64>,
    complement: Vec<f64>,
    interp: MonotoneCubic,
    mean: Option<f64>,
    second_moment: Option<f64>,
}

impl TryFrom<GridTransformData> for GridTransform {
    type Error = Error;

    fn try_from(d: GridTransformData) -> Result<Self> {
        let g = match d.complement {
            Some(c) => {
                if c.len() != d.values.len() {
                    return Err(Error::domain("grid transform complement and values differ in length"));
                }
                GridTransform::from_complement(d.nodes, c, d.mean)?
            }
            None => GridTransform::new(d.nodes, d.values, d.mean)?,
        };
        Ok(g.with_second_moment(d.second_moment))
    }
}

impl From<GridTransform> for GridTransformData {
    fn from(g: GridTransform) -> Self {
        GridTransformData {
            nodes: g.nodes,
            values: g.values,
            complement: Some(g.complement),
            mean: g.mean,
            second_moment: g.second_moment,
        }
    }
}

impl GridTransform {
    /// `nodes` must start at 0 and increase strictly; values must lie in [0,1].
    pub fn new(nodes: Vec<f64>, values: Vec<f64>, mean: Option<f64>) -> Result<Self> {
        let complement = values.iter().map(|v| 1.0 - v).collect();
        GridTransform::from_complement(nodes, complement, mean)
    }

    /// Builds from node values of `1 - F`.
    pub fn from_complement(nodes: Vec<f64>, complement: Vec<f64>, mean: Option<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes.len() != complement.len() {
            return Err(Error::domain("grid transform needs matching node/value vectors of length >= 2"));
        }
        if nodes[0] != 0.0 || nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::domain("grid nodes must start at 0 and increase strictly"));
        }
        if complement.iter().any(|c| !c.is_finite() || *c < -1e-12 || *c > 1.0) {
            return Err(Error::Numerical("grid transform values must lie in [0, 1]".into()));
        }
        let mut complement = complement;
        complement[0] = 0.0;
        for c in complement.iter_mut() {
            *c = c.max(0.0);
        }
        let mut h: Vec<f64> = nodes.iter().zip(&complement).map(|(s, c)| if *s > 0.0 { c / s } else { 0.0 }).collect();
        h[0] = match mean {
            Some(m) => m,
            None if nodes.len() > 2 => {
                // linear extrapolation, never below the first interior value
                let slope = (h[2] - h[1]) / (nodes[2] - nodes[1]);
                (h[1] - slope * nodes[1]).max(h[1])
            }
            None => h[1],
        };
        let x = nodes.iter().map(|s| s.ln_1p()).collect();
        let log_h = h.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
        Ok(GridTransform {
            values: complement.iter().map(|c| 1.0 - c).collect(),
            interp: MonotoneCubic::new(x, log_h),
            complement,
            nodes,
            mean,
            second_moment: None,
        })
    }

    /// Samples any function on the nodes.
    pub fn sample<F>(nodes: Vec<f64>, mean: Option<f64>, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let values = nodes.iter().map(|&s| f(s)).collect::<Result<Vec<_>>>()?;
        GridTransform::new(nodes, values, mean)
    }

    /// Samples `1 - F` on the nodes.
    pub fn sample_complement<F>(nodes: Vec<f64>, mean: Option<f64>, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let c = nodes.iter().map(|&s| f(s)).collect::<Result<Vec<_>>>()?;
        GridTransform::from_complement(nodes, c, mean)
    }

    pub fn with_second_moment(mut self, m2: Option<f64>) -> Self {
        self.second_moment = m2;
        self
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Node values of `1 - F`.
    pub fn complements(&self) -> &[f64] {
        &self.complement
    }

    pub fn mean(&self) -> Option<f64> {
        self.mean
    }

    pub fn second_moment(&self) -> Option<f64> {
        self.second_moment
    }

    pub fn upper(&self) -> f64 {
        *self.nodes.last().expect("non-empty grid")
    }

    fn check(&self, s: f64) -> Result<()> {
        let hi = self.upper();
        if s.is_nan() || s < 0.0 || s > hi * (1.0 + 1e-12) {
            return Err(Error::Range { s, lo: 0.0, hi });
        }
        Ok(())
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        self.check(s)?;
        Ok(1.0 - self.complement_clamped(s))
    }

    /// `1 - F(s)` inside the grid.
    pub fn complement(&self, s: f64) -> Result<f64> {
        self.check(s)?;
        Ok(self.complement_clamped(s))
    }

    /// Like [`GridTransform::eval`] but holds the last node value beyond the grid.
    pub fn eval_clamped(&self, s: f64) -> f64 {
        1.0 - self.complement_clamped(s)
    }

    /// `1 - F(s)`, held at the last node value beyond the grid.
    pub fn complement_clamped(&self, s: f64) -> f64 {
        let s = s.max(0.0);
        if s >= self.upper() {
            return *self.complement.last().expect("non-empty grid");
        }
        let i = self.nodes.partition_point(|&n| n <= s);
        let (a, b) = (self.complement[i - 1], self.complement[i]);
        (s * self.interp.eval(s.ln_1p()).exp()).clamp(a.min(b), a.max(b))
    }

    /// Largest node value increase relative to `prev` (0 when nowhere larger).
    pub fn max_ascent_over(&self, prev: &GridTransform) -> (f64, usize) {
        let mut worst = 0.0;
        let mut count = 0;
        for (a, b) in self.complement.iter().zip(&prev.complement) {
            let up = b - a;
            if up > 0.0 {
                count += 1;
                worst = f64::max(worst, up);
            }
        }
        (worst, count)
    }

    /// Sup-norm distance over the first `len` nodes.
    pub fn sup_distance(&self, other: &GridTransform, len: usize) -> f64 {
        self.complement
            .iter()
            .zip(&other.complement)
            .take(len)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_nonincreasing(&self, slack: f64) -> bool {
        self.complement.windows(2).all(|w| w[1] + slack >= w[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_layout() {
        let spec = GridSpec::for_mean(2.0);
        let s = spec.build().unwrap();
        assert_eq!(s.len(), 513);
        assert_eq!(s[0], 0.0);
        assert!((s[1] - 5e-7).abs() < 1e-20);
        assert_eq!(*s.last().unwrap(), 25.0);
        assert_eq!(spec.core_len(), s.len());
    }

    #[test]
    fn grid_extends_for_wide_mixing_support() {
        let spec = GridSpec { t_max: 3.0, ..GridSpec::for_mean(1.0) };
        let s = spec.build().unwrap();
        assert!(s.len() > 513);
        assert_eq!(s[512], 50.0);
        assert!((s.last().unwrap() - 150.0).abs() < 1e-9);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn interpolation_tracks_smooth_transform() {
        let nodes = GridSpec::for_mean(1.0).build().unwrap();
        let g = GridTransform::sample(nodes, Some(1.0), |s| Ok(1.0 / (1.0 + s))).unwrap();
        let worst = (0..5000)
            .map(|i| 1e-6 * (1.0f64 + i as f64 * 1.7).powf(1.9))
            .filter(|s| *s <= 50.0)
            .map(|s| (g.eval(s).unwrap() - 1.0 / (1.0 + s)).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "worst interpolation error {worst}");
    }

    #[test]
    fn out_of_range_is_an_error() {
        let g = GridTransform::new(vec![0.0, 1.0, 2.0], vec![1.0, 0.5, 0.3], None).unwrap();
        assert_eq!(g.eval(3.0), Err(Error::Range { s: 3.0, lo: 0.0, hi: 2.0 }));
        assert!((g.eval_clamped(3.0) - 0.3).abs() < 1e-15);
        assert!(GridTransform::new(vec![0.0, 1.0], vec![1.0, 1.5], None).is_err());
        assert!(GridTransform::new(vec![0.5, 1.0], vec![1.0, 0.5], None).is_err());
    }

    #[test]
    fn json_round_trip_rebuilds_interpolant() {
        let g = GridTransform::new(vec![0.0, 1.0, 2.0, 4.0], vec![1.0, 0.5, 0.3, 0.1], Some(1.0)).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        let back: GridTransform = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.eval(3.0).unwrap(), g.eval(3.0).unwrap());
    }
}
