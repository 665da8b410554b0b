//! Uniform Cartesian samples on a box, the substrate of the spectral evaluator.

use crate::error::{FracError, Result};
use crate::field::ScalarField;

/// Samples on the periodic lattice `center + (-L + j h)`, `h = 2L/N`,
/// `j = 0..N` along every axis, stored row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub dim: usize,
    pub half_width: f64,
    pub points_per_axis: usize,
    pub center: Vec<f64>,
    pub samples: Vec<f64>,
}

impl GridField {
    pub fn new(dim: usize, half_width: f64, points_per_axis: usize, center: Vec<f64>, samples: Vec<f64>) -> Result<Self> {
        if points_per_axis < 16 || !points_per_axis.is_multiple_of(2) {
            return Err(FracError::InvalidInput(format!(
                "points per axis must be even and >= 16, got {points_per_axis}"
            )));
        }
        if !(half_width > 0.0) {
            return Err(FracError::InvalidInput("box half-width must be positive".into()));
        }
        if center.len() != dim {
            return Err(FracError::DimensionMismatch { expected: dim, got: center.len() });
        }
        let len = points_per_axis.pow(dim as u32);
        if samples.len() != len {
            return Err(FracError::InvalidInput(format!("expected {len} samples, got {}", samples.len())));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(FracError::InvalidInput("grid samples must be finite".into()));
        }
        Ok(Self { dim, half_width, points_per_axis, center, samples })
    }

    pub fn sample(field: &ScalarField, half_width: f64, points_per_axis: usize) -> Result<Self> {
        Self::sample_centered(field, half_width, points_per_axis, &vec![0.0; field.dim()])
    }

    pub fn sample_centered(field: &ScalarField, half_width: f64, points_per_axis: usize, center: &[f64]) -> Result<Self> {
        let dim = field.dim();
        let total = points_per_axis.pow(dim as u32);
        let h = 2.0 * half_width / points_per_axis as f64;
        let mut samples = Vec::with_capacity(total);
        let mut idx = vec![0usize; dim];
        let mut p = vec![0.0; dim];
        for _ in 0..total {
            for d in 0..dim {
                p[d] = center[d] - half_width + idx[d] as f64 * h;
            }
            samples.push(field.eval(&p));
            for d in (0..dim).rev() {
                idx[d] += 1;
                if idx[d] < points_per_axis {
                    break;
                }
                idx[d] = 0;
            }
        }
        Self::new(dim, half_width, points_per_axis, center.to_vec(), samples)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points_per_axis as f64
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Multi-index of a flat position.
    pub fn index(&self, mut flat: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for d in (0..self.dim).rev() {
            out[d] = flat % self.points_per_axis;
            flat /= self.points_per_axis;
        }
        out
    }

    pub fn coordinate(&self, flat: usize) -> [f64; 3] {
        let idx = self.index(flat);
        let h = self.spacing();
        let mut out = [0.0; 3];
        for d in 0..self.dim {
            out[d] = self.center[d] - self.half_width + idx[d] as f64 * h;
        }
        out
    }

    /// Trapezoid (periodic) quadrature of the samples over the box.
    pub fn integral(&self) -> f64 {
        self.samples.iter().sum::<f64>() * self.spacing().powi(self.dim as i32)
    }

    /// Max |sample| over lattice points whose sup-distance from the center
    /// exceeds `(1 - fraction)·L`.
    pub fn shell_max(&self, fraction: f64) -> f64 {
        let cut = (1.0 - fraction) * self.half_width;
        (0..self.len())
            .filter(|&i| {
                let c = self.coordinate(i);
                (0..self.dim).any(|d| (c[d] - self.center[d]).abs() > cut)
            })
            .map(|i| self.samples[i].abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_catalog_field;
    use crate::params::FracParams;

    #[test]
    fn rejects_odd_or_small_grids() {
        assert!(GridField::new(2, 1.0, 15, vec![0.0; 2], vec![0.0; 225]).is_err());
        assert!(GridField::new(2, 1.0, 8, vec![0.0; 2], vec![0.0; 64]).is_err());
        assert!(GridField::new(2, 1.0, 16, vec![0.0; 2], vec![f64::NAN; 256]).is_err());
    }

    #[test]
    fn gaussian_integral_is_spectrally_accurate() {
        let p = FracParams::new(2, 1.0).unwrap();
        let g = make_catalog_field("gaussian", &p, &[]).unwrap();
        let grid = GridField::sample(&g, 8.0, 64).unwrap();
        assert!((grid.integral() - std::f64::consts::PI).abs() < 1e-12);
        assert!(grid.shell_max(0.1) < 1e-10);
    }

    #[test]
    fn dipole_grid_quadrature_cancels() {
        let p = FracParams::new(2, 1.0).unwrap();
        let d = make_catalog_field("dipole", &p, &[]).unwrap();
        let grid = GridField::sample(&d, 4.0, 128).unwrap();
        assert!(grid.integral().abs() < 1e-10);
    }
}
