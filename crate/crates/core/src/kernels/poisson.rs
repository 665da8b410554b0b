//! Exterior Poisson kernel of the ball `B_k` and the extension `u_k` that
//! equals `u` on the closed ball and is α-harmonic outside it.

use std::f64::consts::PI;
use std::sync::Arc;

use statrs::function::gamma::gamma;

use crate::error::{FracError, Result};
use crate::field::ScalarField;
use crate::operator::constants::KernelConstants;
use crate::operator::pv::{fraclap_pv, EvalResult, PvQuadConfig};
use crate::params::{norm, sphere_area, FracParams};
use crate::quad::{integrate_breaks, QuadOpts};
use crate::report::Report;
use crate::sphere::sphere_integral;
use crate::spline::CubicSpline;

fn kernel_prefactor(params: &FracParams) -> f64 {
    let n = params.nf();
    gamma(0.5 * n) * PI.powf(-0.5 * n - 1.0) * (0.5 * PI * params.alpha).sin()
}

/// `P_k(y, x)` for `|y| < k < |x|`.
pub fn poisson_kernel(y: &[f64], x: &[f64], k: f64, params: &FracParams) -> Result<f64> {
    params.check_point(x)?;
    params.check_point(y)?;
    let (ry, rx) = (norm(y), norm(x));
    if !(ry < k && k < rx) {
        return Err(FracError::Precondition(format!("need |y| < k < |x|, got |y|={ry}, k={k}, |x|={rx}")));
    }
    let a = params.alpha;
    let d = crate::params::dist(x, y);
    Ok(kernel_prefactor(params) * ((rx * rx - k * k) / (k * k - ry * ry)).powf(0.5 * a) * d.powi(-(params.n as i32)))
}

/// Tabulated radial extension: a spline of `ln u_k` (or `u_k` when it is
/// not positive) in `ζ = ln((r² - k²)/k²)`.
struct RadialCache {
    spline: CubicSpline,
    log: bool,
    zeta_min: f64,
    zeta_max: f64,
    /// `u_k ≈ c1 r^{α-n}` beyond the table.
    c1: f64,
}

#[derive(Clone)]
pub struct PoissonExtension {
    base: ScalarField,
    k: f64,
    params: FracParams,
    cache: Option<Arc<RadialCache>>,
}

impl std::fmt::Debug for PoissonExtension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PoissonExtension")
            .field("base", &self.base.label)
            .field("k", &self.k)
            .field("cached", &self.cache.is_some())
            .finish()
    }
}

const ZETA_MIN: f64 = -13.815_510_557_964_274; // ln 1e-6
const CACHE_RADII: f64 = 256.0;

/// Builds `u_k`. Radial bases are tabulated once; other bases are
/// integrated on every evaluation.
pub fn poisson_extend(base: &ScalarField, k: f64, params: &FracParams) -> Result<PoissonExtension> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(FracError::InvalidInput(format!("extension radius must be positive, got {k}")));
    }
    if base.dim() != params.n {
        return Err(FracError::DimensionMismatch { expected: params.n, got: base.dim() });
    }
    let mut ext = PoissonExtension { base: base.clone(), k, params: *params, cache: None };
    if base.is_radial {
        let zeta_max = (CACHE_RADII * CACHE_RADII - 1.0f64).ln();
        let m = ((zeta_max - ZETA_MIN) / 0.05).ceil() as usize;
        let zs: Vec<f64> = (0..=m).map(|i| ZETA_MIN + (zeta_max - ZETA_MIN) * i as f64 / m as f64).collect();
        let mut us = Vec::with_capacity(zs.len());
        for z in &zs {
            let r = k * (1.0 + z.exp()).sqrt();
            us.push(ext.radial_direct(r)?.value);
        }
        let log = us.iter().all(|u| *u > 0.0);
        let ys: Vec<f64> = if log { us.iter().map(|u| u.ln()).collect() } else { us.clone() };
        let r_last = k * (1.0 + zeta_max.exp()).sqrt();
        let c1 = us.last().unwrap() * r_last.powf(params.nf() - params.alpha);
        ext.cache = Some(Arc::new(RadialCache { spline: CubicSpline::natural(zs, ys)?, log, zeta_min: ZETA_MIN, zeta_max, c1 }));
    }
    Ok(ext)
}

impl PoissonExtension {
    pub fn radius(&self) -> f64 {
        self.k
    }

    pub fn base(&self) -> &ScalarField {
        &self.base
    }

    pub fn params(&self) -> &FracParams {
        &self.params
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let r = norm(x);
        if r <= self.k {
            return self.base.eval(x);
        }
        match &self.cache {
            Some(c) => {
                let zeta = ((r * r - self.k * self.k) / (self.k * self.k)).ln();
                if zeta < c.zeta_min {
                    self.radial_direct(r).map(|e| e.value).unwrap_or(f64::NAN)
                } else if zeta > c.zeta_max {
                    c.c1 * r.powf(self.params.alpha - self.params.nf())
                } else {
                    let v = c.spline.eval(zeta);
                    if c.log {
                        v.exp()
                    } else {
                        v
                    }
                }
            }
            None => self.direct(x).map(|e| e.value).unwrap_or(f64::NAN),
        }
    }

    /// The kernel integral evaluated by quadrature, bypassing any cache.
    pub fn direct(&self, x: &[f64]) -> Result<EvalResult> {
        self.params.check_point(x)?;
        let r = norm(x);
        if r <= self.k {
            return Ok(EvalResult::exact(self.base.eval(x)));
        }
        if self.base.is_radial {
            return self.radial_direct(r);
        }
        let n = self.params.n;
        let (a, k) = (self.params.alpha, self.k);
        let m = 2.0 / (2.0 - a);
        let w = r * r - k * k;
        let v0 = (w / (k * k)).powf(1.0 / m);
        let breaks = v_breaks(v0);
        let opts = QuadOpts::new(1e-13, 1e-9).with_max_panels(300);
        let q = sphere_integral(
            n,
            |om| {
                let q = integrate_breaks(
                    |v| {
                        let rho = k * (1.0 - v.powf(m)).max(0.0).sqrt();
                        let mut y = [0.0; 3];
                        let mut d2 = 0.0;
                        for i in 0..n {
                            y[i] = rho * om[i];
                            d2 += (x[i] - y[i]) * (x[i] - y[i]);
                        }
                        rho.powi(n as i32 - 2) * self.base.eval(&y[..n]) * d2.powf(-0.5 * n as f64)
                    },
                    &breaks,
                    &opts,
                );
                (q.value, q.error)
            },
            &opts,
        );
        let pref = kernel_prefactor(&self.params) * w.powf(0.5 * a) * k.powf(2.0 - a) * m / 2.0;
        Ok(EvalResult { value: pref * q.value, error_estimate: pref * q.error, flagged: false, evaluations: q.evals })
    }

    /// Radial base: the sphere mean of `|x-y|^{-n}` is `|S| r^{2-n}/(r²-ρ²)`,
    /// leaving a 1-d integral in `v` with `ρ = k (1 - v^m)^{1/2}`, `m = 2/(2-α)`.
    fn radial_direct(&self, r: f64) -> Result<EvalResult> {
        let n = self.params.n;
        let (a, k) = (self.params.alpha, self.k);
        if r <= k {
            return Ok(EvalResult::exact(self.base.eval_radius(r)));
        }
        let m = 2.0 / (2.0 - a);
        let w = r * r - k * k;
        let v0 = (w / (k * k)).powf(1.0 / m);
        let q = integrate_breaks(
            |v| {
                let vm = v.powf(m);
                let rho = k * (1.0 - vm).max(0.0).sqrt();
                // r² - ρ² = w + k² v^m, without cancellation
                rho.powi(n as i32 - 2) * self.base.eval_radius(rho) / (w + k * k * vm)
            },
            &v_breaks(v0),
            &QuadOpts::new(1e-15, 1e-12).with_max_panels(400),
        );
        let pref = kernel_prefactor(&self.params)
            * w.powf(0.5 * a)
            * sphere_area(n)
            * r.powf(2.0 - n as f64)
            * k.powf(2.0 - a)
            * m
            / 2.0;
        if !q.converged {
            return Err(FracError::BudgetExhausted { budget: 400, value: pref * q.value, error: pref * q.error });
        }
        Ok(EvalResult { value: pref * q.value, error_estimate: pref * q.error, flagged: false, evaluations: q.evals })
    }

    /// `u_k` as a field: decay `n - α`, kink on the sphere `|x| = k`.
    pub fn field(&self) -> ScalarField {
        let ext = self.clone();
        let mut f = ScalarField::new(self.params.n, format!("ext_k={}[{}]", self.k, self.base.label), move |x| ext.eval(x))
            .with_decay(self.params.nf() - self.params.alpha)
            .with_kink(self.k);
        f.bounded = self.base.bounded || self.base.support_radius.is_some();
        f.is_radial = self.base.is_radial;
        f
    }
}

fn v_breaks(v0: f64) -> Vec<f64> {
    let mut b = vec![0.0];
    for s in [0.01, 0.1, 1.0, 10.0] {
        let v = v0 * s;
        if v > 1e-12 && v < 1.0 {
            b.push(v);
        }
    }
    b.push(1.0);
    b
}

/// Checks `(-Δ)^{α/2} u_k = 0` at points outside `B_{1.1k}`: a case passes
/// when `|value| <= max(1e-2, 3·error_estimate)`.
pub fn verify_alpha_harmonic_outside(
    ext: &PoissonExtension,
    test_points: &[Vec<f64>],
    cfg: &PvQuadConfig,
    k: &KernelConstants,
) -> Result<Report> {
    let params = ext.params;
    for x in test_points {
        params.check_point(x)?;
        if !(norm(x) > 1.1 * ext.k) {
            return Err(FracError::Precondition(format!(
                "test point {x:?} is within 1.1k of the extension sphere"
            )));
        }
    }
    let field = ext.field();
    let mut report = Report::new("alpha_harmonic_outside", &params);
    for x in test_points {
        let e = fraclap_pv(&field, x, &params, cfg, k)?;
        let threshold = 1e-2f64.max(3.0 * e.error_estimate);
        report.case_le(format!("fraclap(u_k)({x:?})"), "abs", e.value.abs(), threshold);
    }
    Ok(report)
}
