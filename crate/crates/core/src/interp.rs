//! Shape-preserving piecewise-cubic Hermite interpolation.
//!
//! Slopes come from the derivative of the local five-point Lagrange
//! polynomial and are then limited (Hyman filter) so the interpolant is
//! monotone wherever the data are. Between two nodes the interpolant never
//! leaves the interval spanned by the two node values.

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    /// `x` must be strictly increasing with at least two points.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert!(x.len() >= 2 && x.len() == y.len());
        let n = x.len();
        let secant: Vec<f64> = (0..n - 1)
            .map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i]))
            .collect();
        let mut d = vec![0.0; n];
        for (i, di) in d.iter_mut().enumerate() {
            let lo = i.saturating_sub(2).min(n.saturating_sub(5));
            let hi = (lo + 5).min(n);
            *di = lagrange_derivative(&x[lo..hi], &y[lo..hi], x[i]);
        }
        // Hyman filter
        for i in 0..n {
            let left = if i > 0 { Some(secant[i - 1]) } else { None };
            let right = if i + 1 < n { Some(secant[i]) } else { None };
            d[i] = match (left, right) {
                (Some(l), Some(r)) => {
                    if l * r <= 0.0 {
                        0.0
                    } else {
                        let bound = 3.0 * l.abs().min(r.abs());
                        if d[i] * l <= 0.0 {
                            0.0
                        } else {
                            d[i].signum() * d[i].abs().min(bound)
                        }
                    }
                }
                (None, Some(s)) | (Some(s), None) => {
                    if d[i] * s <= 0.0 {
                        0.0
                    } else {
                        d[i].signum() * d[i].abs().min(3.0 * s.abs())
                    }
                }
                (None, None) => 0.0,
            };
        }
        MonotoneCubic { x, y, d }
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Evaluates the interpolant; `t` is clamped to the node range.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let i = match self.x.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => return self.y[i],
            Err(i) => i - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let u = (t - self.x[i]) / h;
        let u2 = u * u;
        let u3 = u2 * u;
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }
}

fn lagrange_derivative(xs: &[f64], ys: &[f64], t: f64) -> f64 {
    let m = xs.len();
    let mut total = 0.0;
    for j in 0..m {
        // d/dt of the j-th basis polynomial
        let mut denom = 1.0;
        for k in 0..m {
            if k != j {
                denom *= xs[j] - xs[k];
            }
        }
        let mut deriv = 0.0;
        for k in 0..m {
            if k == j {
                continue;
            }
            let mut prod = 1.0;
            for l in 0..m {
                if l != j && l != k {
                    prod *= t - xs[l];
                }
            }
            deriv += prod;
        }
        total += ys[j] * deriv / denom;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproduces_smooth_function_to_fourth_order() {
        let x: Vec<f64> = (0..=200).map(|i| i as f64 * 0.02).collect();
        let y: Vec<f64> = x.iter().map(|v| (-v).exp()).collect();
        let p = MonotoneCubic::new(x, y);
        let worst = (0..4000)
            .map(|i| i as f64 * 0.001 + 0.0003)
            .map(|t| (p.eval(t) - (-t).exp()).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-9, "worst {worst}");
    }

    #[test]
    fn flat_data_stays_flat() {
        let p = MonotoneCubic::new(vec![0.0, 1.0, 2.0, 3.0], vec![1.0, 1.0, 0.5, 0.5]);
        for i in 0..=30 {
            let v = p.eval(i as f64 * 0.1);
            assert!((0.5..=1.0).contains(&v));
        }
        assert_eq!(p.eval(0.5), 1.0);
        assert_eq!(p.eval(2.5), 0.5);
    }

    proptest! {
        #[test]
        fn interpolant_respects_neighbouring_values(
            steps in prop::collection::vec((0.01f64..1.0, 0.0f64..0.3), 3..40),
            probe in 0.0f64..1.0,
        ) {
            let mut x = vec![0.0];
            let mut y = vec![1.0];
            for (dx, dy) in &steps {
                x.push(x.last().unwrap() + dx);
                y.push(y.last().unwrap() - dy);
            }
            let p = MonotoneCubic::new(x.clone(), y.clone());
            let t = probe * x.last().unwrap();
            let i = x.partition_point(|v| *v <= t).saturating_sub(1).min(x.len() - 2);
            let v = p.eval(t);
            prop_assert!(v <= y[i] + 1e-12 && v >= y[i + 1] - 1e-12);
        }
    }
}
