//! Grid witness of `∫ u (-Δ)^{α/2} φ = ∫ (-Δ)^{α/2} u · φ`.

use rayon::prelude::*;

use crate::error::Result;
use crate::field::ScalarField;
use crate::grid::GridField;
use crate::operator::constants::KernelConstants;
use crate::operator::pv::{fraclap_pv, PvQuadConfig};
use crate::params::FracParams;

/// Both sides as trapezoid sums over `[-box, box]^n` with `points` samples
/// per axis; returns `|lhs - rhs|`. Grid points where the multiplying field
/// is below 1e-16 of its maximum contribute nothing and are skipped.
pub fn verify_selfadjoint_identity(
    u: &ScalarField,
    phi: &ScalarField,
    params: &FracParams,
    cfg: &PvQuadConfig,
    k: &KernelConstants,
    half_width: f64,
    points: usize,
) -> Result<f64> {
    Ok(selfadjoint_sides(u, phi, params, cfg, k, half_width, points)?.residual())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfAdjointSides {
    /// `∫ u · (-Δ)^{α/2} φ`
    pub lhs: f64,
    /// `∫ (-Δ)^{α/2} u · φ`
    pub rhs: f64,
}

impl SelfAdjointSides {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

pub fn selfadjoint_sides(
    u: &ScalarField,
    phi: &ScalarField,
    params: &FracParams,
    cfg: &PvQuadConfig,
    k: &KernelConstants,
    half_width: f64,
    points: usize,
) -> Result<SelfAdjointSides> {
    k.require(params)?;
    let gu = GridField::sample(u, half_width, points)?;
    let gphi = GridField::sample(phi, half_width, points)?;
    let w = gu.spacing().powi(params.n as i32);
    let side = |mult: &GridField, op: &ScalarField| -> Result<f64> {
        let peak = mult.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let terms: Result<Vec<f64>> = (0..mult.len())
            .into_par_iter()
            .map(|i| {
                let m = mult.samples[i];
                if m == 0.0 || m.abs() < 1e-16 * peak {
                    return Ok(0.0);
                }
                let c = mult.coordinate(i);
                Ok(m * fraclap_pv(op, &c[..params.n], params, cfg, k)?.value)
            })
            .collect();
        // fixed summation order keeps the result independent of scheduling
        Ok(terms?.iter().sum::<f64>() * w)
    };
    Ok(SelfAdjointSides { lhs: side(&gu, phi)?, rhs: side(&gphi, u)? })
}
