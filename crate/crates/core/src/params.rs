use serde::Serialize;

use crate::error::{FracError, Result};

/// Dimension and order of the operator `(-Δ)^{α/2}` on `R^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FracParams {
    pub n: usize,
    pub alpha: f64,
}

impl FracParams {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        if !(n == 2 || n == 3) {
            return Err(FracError::UnsupportedDimension(n));
        }
        if !(alpha > 0.0 && alpha < 2.0) || !alpha.is_finite() {
            return Err(FracError::AlphaOutOfRange(alpha));
        }
        Ok(Self { n, alpha })
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    /// Critical exponent `(n+α)/(n-α)`.
    pub fn critical_p(&self) -> f64 {
        (self.nf() + self.alpha) / (self.nf() - self.alpha)
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(FracError::DimensionMismatch { expected: self.n, got: x.len() });
        }
        Ok(())
    }
}

/// Surface area of the unit sphere `S^{n-1}`.
pub fn sphere_area(n: usize) -> f64 {
    use std::f64::consts::PI;
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => 2.0 * PI.powf(n as f64 / 2.0) / statrs::function::gamma::gamma(n as f64 / 2.0),
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_alpha_and_dimension() {
        assert_eq!(FracParams::new(2, 2.5), Err(FracError::AlphaOutOfRange(2.5)));
        assert_eq!(FracParams::new(2, 0.0), Err(FracError::AlphaOutOfRange(0.0)));
        assert!(FracParams::new(2, f64::NAN).is_err());
        assert_eq!(FracParams::new(1, 1.0), Err(FracError::UnsupportedDimension(1)));
        assert!(FracParams::new(3, 1.999).is_ok());
    }

    #[test]
    fn critical_exponent() {
        let p = FracParams::new(2, 1.0).unwrap();
        assert_eq!(p.critical_p(), 3.0);
    }

    #[test]
    fn sphere_areas_agree_with_gamma_formula() {
        use std::f64::consts::PI;
        for n in 2..=3 {
            let g = 2.0 * PI.powf(n as f64 / 2.0) / statrs::function::gamma::gamma(n as f64 / 2.0);
            assert!((sphere_area(n) - g).abs() < 1e-12);
        }
    }
}
