//! Normalization constants of the singular-integral operator and of its
//! fundamental solution, and their cross-evaluator validation.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use statrs::function::gamma::gamma;

use crate::error::{FracError, Result};
use crate::field::make_catalog_field;
use crate::kernels::riesz::riesz_radial_field_unchecked;
use crate::operator::pv::{pv_unchecked, PvQuadConfig};
use crate::operator::spectral::{spectral_points_unchecked, SpectralConfig};
use crate::params::FracParams;

/// `C_{n,α}` such that `C ∫ (f(x) - f(z)) / |x-z|^{n+α} dz` has symbol `|ξ|^α`.
pub fn c_pv(params: &FracParams) -> f64 {
    let (n, a) = (params.nf(), params.alpha);
    a * 2f64.powf(a - 1.0) * gamma(0.5 * (n + a)) / (PI.powf(0.5 * n) * gamma(1.0 - 0.5 * a))
}

/// `c_{n,α}` such that `c |x|^{α-n}` is the fundamental solution.
pub fn c_riesz(params: &FracParams) -> f64 {
    let (n, a) = (params.nf(), params.alpha);
    gamma(0.5 * (n - a)) / (2f64.powf(a) * PI.powf(0.5 * n) * gamma(0.5 * a))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConstants {
    pub params: FracParams,
    pub c_pv: f64,
    pub c_riesz: f64,
    validated: bool,
}

impl KernelConstants {
    /// Closed-form values, not yet validated.
    pub fn closed_form(params: &FracParams) -> Self {
        Self { params: *params, c_pv: c_pv(params), c_riesz: c_riesz(params), validated: false }
    }

    pub fn validated(&self) -> bool {
        self.validated
    }

    pub(crate) fn require(&self, params: &FracParams) -> Result<()> {
        if !self.validated {
            return Err(FracError::NotValidated);
        }
        if self.params != *params {
            return Err(FracError::InvalidInput(format!(
                "constants were validated for n={}, alpha={} but used with n={}, alpha={}",
                self.params.n, self.params.alpha, params.n, params.alpha
            )));
        }
        Ok(())
    }
}

/// Points at which the gaussian check compares the two evaluators.
fn gaussian_points(n: usize) -> Vec<Vec<f64>> {
    let base = [[0.0, 0.0, 0.0], [0.5, 0.0, 0.0], [0.0, -0.7, 0.2], [1.0, 1.0, 0.0], [-1.2, 0.4, -0.3]];
    base.iter().map(|p| p[..n].to_vec()).collect()
}

type Key = (usize, u64, u64, u64, u64, usize);

fn cache() -> &'static Mutex<HashMap<Key, KernelConstants>> {
    static CACHE: OnceLock<Mutex<HashMap<Key, KernelConstants>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Computes both constants and validates them: the PV evaluator must match
/// the spectral evaluator on a gaussian (relative 1e-3, 5 points) and must
/// invert the Riesz potential of a bump (relative 1e-2, 3 points). Results
/// are memoized per process.
pub fn validate_constants(params: &FracParams, cfg: &PvQuadConfig) -> Result<KernelConstants> {
    let params = FracParams::new(params.n, params.alpha)?;
    cfg.validate()?;
    let key = (
        params.n,
        params.alpha.to_bits(),
        cfg.inner_radius.to_bits(),
        cfg.outer_radius.to_bits(),
        cfg.tolerance.to_bits(),
        cfg.max_evaluations,
    );
    if let Some(k) = cache().lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
        return Ok(*k);
    }
    let mut k = KernelConstants::closed_form(&params);
    if !(k.c_pv > 0.0 && k.c_riesz > 0.0) {
        return Err(FracError::ValidationFailed("non-positive closed-form constant".into()));
    }

    // (a) PV against the spectral symbol on a gaussian.
    let g = make_catalog_field("gaussian", &params, &[])?;
    let points = gaussian_points(params.n);
    let spec = spectral_points_unchecked(&g, &points, &params, &SpectralConfig::for_dim(params.n), k.c_pv)?;
    for (p, s) in points.iter().zip(&spec) {
        let pv = pv_unchecked(&g, p, &params, cfg, k.c_pv)?;
        let rel = (pv.value - s).abs() / s.abs();
        if !(rel <= 1e-3) {
            return Err(FracError::ValidationFailed(format!(
                "PV {:.9} vs spectral {s:.9} at {p:?} (relative {rel:.2e})",
                pv.value
            )));
        }
    }

    // (b) PV inverts the Riesz potential of a bump.
    let bump = make_catalog_field("bump", &params, &[])?;
    let phi = riesz_radial_field_unchecked(&bump, &params, k.c_riesz)?;
    for r in [0.0, 0.3, 0.6] {
        let mut x = vec![0.0; params.n];
        x[0] = r;
        let pv = pv_unchecked(&phi, &x, &params, cfg, k.c_pv)?;
        let want = bump.eval(&x);
        let rel = (pv.value - want).abs() / want;
        if !(rel <= 1e-2) {
            return Err(FracError::ValidationFailed(format!(
                "PV of the Riesz potential gives {:.6} vs {want:.6} at r={r} (relative {rel:.2e})",
                pv.value
            )));
        }
    }

    k.validated = true;
    cache().lock().unwrap_or_else(|e| e.into_inner()).insert(key, k);
    Ok(k)
}
