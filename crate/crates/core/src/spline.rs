//! Natural cubic splines on nonuniform nodes.

use crate::error::{FracError, Result};

#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    // second derivatives at the nodes
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn natural(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n < 3 || ys.len() != n {
            return Err(FracError::InvalidInput("spline needs >= 3 matching nodes".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(FracError::InvalidInput("spline nodes must increase strictly".into()));
        }
        if ys.iter().any(|y| !y.is_finite()) {
            return Err(FracError::InvalidInput("spline values must be finite".into()));
        }
        // Thomas algorithm on the interior second derivatives.
        let mut m = vec![0.0; n];
        let mut c_prime = vec![0.0; n];
        let mut d_prime = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            let a = h0 / 6.0;
            let b = (h0 + h1) / 3.0;
            let c = h1 / 6.0;
            let d = (ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0;
            let denom = b - a * c_prime[i - 1];
            c_prime[i] = c / denom;
            d_prime[i] = (d - a * d_prime[i - 1]) / denom;
        }
        for i in (1..n - 1).rev() {
            m[i] = d_prime[i] - c_prime[i] * m[i + 1];
        }
        Ok(Self { xs, ys, m })
    }

    /// Spline through even data: nodes `rs >= 0` are mirrored to `-rs` so
    /// the interpolant has zero slope at the origin without forcing its
    /// curvature there.
    pub fn even(rs: &[f64], ys: &[f64]) -> Result<Self> {
        let mut xs = Vec::with_capacity(2 * rs.len());
        let mut vs = Vec::with_capacity(2 * rs.len());
        for (r, y) in rs.iter().zip(ys).rev() {
            if *r > 0.0 {
                xs.push(-r);
                vs.push(*y);
            }
        }
        for (r, y) in rs.iter().zip(ys) {
            xs.push(*r);
            vs.push(*y);
        }
        Self::natural(xs, vs)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let i = match self.xs.partition_point(|&v| v <= x) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_nodes_and_lines() {
        let xs: Vec<f64> = (0..10).map(|i| (i as f64).powf(1.3)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let s = CubicSpline::natural(xs.clone(), ys.clone()).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert!((s.eval(*x) - y).abs() < 1e-12);
        }
        assert!((s.eval(3.3) - 5.6).abs() < 1e-12);
    }

    #[test]
    fn smooth_function_converges() {
        let xs: Vec<f64> = (0..=200).map(|i| i as f64 * 0.01).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (-x * x).exp()).collect();
        let s = CubicSpline::even(&xs, &ys).unwrap();
        for x in [0.0, 0.005, 0.333, 1.2345] {
            assert!((s.eval(x) - (-x * x).exp()).abs() < 1e-7, "{x}");
        }
    }

    #[test]
    fn rejects_unsorted_nodes() {
        assert!(CubicSpline::natural(vec![0.0, 2.0, 1.0], vec![0.0; 3]).is_err());
    }
}
