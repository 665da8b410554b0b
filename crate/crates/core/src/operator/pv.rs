//! Principal-value evaluator for `(-Δ)^{α/2}` in polar coordinates about
//! the evaluation point.
//!
//! With `A(ρ) = ∫_{hemisphere} 2f(x) - f(x+ρω) - f(x-ρω) dω` the operator is
//! `C ∫_0^∞ ρ^{-1-α} A(ρ) dρ`, an ordinary integral since `A = O(ρ²)`.
//! The range splits into `[0, δ]` (substitution `ρ = δ u^{1/(2-α)}` absorbs
//! the weight), `[δ, Ρ]` (log-radial), and an analytic tail beyond `Ρ`.

use std::cell::Cell;
use std::f64::consts::PI;

use crate::error::{FracError, Result};
use crate::field::ScalarField;
use crate::operator::constants::KernelConstants;
use crate::params::{norm, sphere_area, FracParams};
use crate::quad::{graded_panels, integrate_graded, integrate_nested, QuadOpts};
use crate::sphere::{cap_integral_axial_with_breaks, cap_integral_with_breaks, Frame};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvQuadConfig {
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub tolerance: f64,
    pub max_evaluations: usize,
}

impl Default for PvQuadConfig {
    fn default() -> Self {
        Self { inner_radius: 0.1, outer_radius: 64.0, tolerance: 1e-8, max_evaluations: 50_000_000 }
    }
}

impl PvQuadConfig {
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.inner_radius > 0.0 && self.inner_radius < self.outer_radius && self.outer_radius.is_finite()) {
            return Err(FracError::InvalidInput("need 0 < inner_radius < outer_radius".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(FracError::InvalidInput("tolerance must be positive".into()));
        }
        if self.max_evaluations < 10_000 {
            return Err(FracError::InvalidInput("max_evaluations must be at least 1e4".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub value: f64,
    /// Quadrature residual plus tail-model error. Heuristic, not a bound.
    pub error_estimate: f64,
    /// The point sits within one inner radius of a sphere across which the
    /// field is not smooth; the inner radius was shrunk and the error inflated.
    pub flagged: bool,
    pub evaluations: usize,
}

impl EvalResult {
    pub fn exact(value: f64) -> Self {
        Self { value, error_estimate: 0.0, flagged: false, evaluations: 0 }
    }
}

/// `(-Δ)^{α/2} f(x)` by the principal-value integral.
pub fn fraclap_pv(
    f: &ScalarField,
    x: &[f64],
    params: &FracParams,
    cfg: &PvQuadConfig,
    k: &KernelConstants,
) -> Result<EvalResult> {
    k.require(params)?;
    pv_unchecked(f, x, params, cfg, k.c_pv)
}

fn point3(n: usize, x: &[f64], rho: f64, w: &[f64; 3], sign: f64) -> [f64; 3] {
    let mut p = [0.0; 3];
    for d in 0..n {
        p[d] = x[d] + sign * rho * w[d];
    }
    p
}

pub(crate) fn pv_unchecked(
    f: &ScalarField,
    x: &[f64],
    params: &FracParams,
    cfg: &PvQuadConfig,
    c: f64,
) -> Result<EvalResult> {
    params.check_point(x)?;
    cfg.validate()?;
    if f.dim() != params.n {
        return Err(FracError::DimensionMismatch { expected: params.n, got: f.dim() });
    }
    if !f.certified_in_l_alpha(params) {
        return Err(FracError::TailUnmodeled(format!("`{}` has neither decay metadata nor compact support", f.label)));
    }
    let beta = f.tail_exponent().unwrap_or(0.0);
    let n = params.n;
    let alpha = params.alpha;
    let area = sphere_area(n);
    let xr = norm(x);
    let evals = Cell::new(0usize);
    let ev = |p: &[f64]| {
        evals.set(evals.get() + 1);
        f.eval(p)
    };
    let fx = ev(x);

    // Spheres across which f is not smooth enough for the symmetrized form.
    let singular: Vec<f64> = f.support_radius.into_iter().chain(f.kink_radius).filter(|s| *s > 0.0).collect();
    let gap = singular.iter().map(|s| (xr - s).abs()).fold(f64::INFINITY, f64::min);
    let flagged = gap < cfg.inner_radius;
    let delta = if flagged { (0.5 * gap).max(1e-4 * cfg.inner_radius) } else { cfg.inner_radius };

    // Magnitude used to turn the relative tolerance into an absolute one.
    let mut scale = fx.abs();
    for r in [delta, 0.5, 1.0, 2.0, 4.0] {
        for d in 0..n {
            for s in [-1.0, 1.0] {
                let mut p = [0.0; 3];
                p[..n].copy_from_slice(x);
                p[d] += s * r;
                scale = scale.max(ev(&p[..n]).abs());
            }
        }
    }
    let abs_tol = (cfg.tolerance * scale).max(1e-300);
    // radial fields are symmetric about the axis through x
    let axial = f.is_radial && n == 3;
    let frame = if xr > 0.0 { Frame::with_axis(n, x) } else { Frame::standard(n) };
    let cap = |theta: f64, extra: &[f64], g: &mut dyn FnMut(&[f64; 3]) -> (f64, f64), opts: &QuadOpts| {
        if axial {
            cap_integral_axial_with_breaks(&frame, theta, extra, g, opts)
        } else {
            cap_integral_with_breaks(&frame, theta, extra, g, opts)
        }
    };
    // Polar angles (about x) at which x ± ρω crosses a singular sphere.
    let crossings = |rho: f64| {
        let mut out = Vec::new();
        if xr > 0.0 {
            for s in &singular {
                let c1 = (s * s - xr * xr - rho * rho) / (2.0 * rho * xr);
                if c1.abs() < 1.0 {
                    out.push(c1.acos());
                    out.push(PI - c1.acos());
                }
            }
        }
        out
    };

    // A(ρ) with the requested absolute tolerance.
    let a_of = |rho: f64, tol: f64| {
        let q = cap(
            0.5 * PI,
            &crossings(rho),
            &mut |w| {
                let p = point3(n, x, rho, w, 1.0);
                let m = point3(n, x, rho, w, -1.0);
                (2.0 * fx - ev(&p[..n]) - ev(&m[..n]), 0.0)
            },
            &QuadOpts::new(tol, 0.1 * cfg.tolerance).with_max_panels(200),
        );
        (q.value, q.error)
    };

    // (i) inner ball, ρ = δ u^{1/(2-α)}. Below ρ_f cancellation dominates and
    // A/ρ² is replaced by its even expansion a + bρ² fitted at ρ_f, 2ρ_f.
    let rho_floor = 0.05 * delta;
    let inner_pref = delta.powf(2.0 - alpha) / (2.0 - alpha);
    let (g1, e1) = a_of(rho_floor, abs_tol * rho_floor * rho_floor);
    let (g2, e2) = a_of(2.0 * rho_floor, 4.0 * abs_tol * rho_floor * rho_floor);
    let (g1, g2) = (g1 / (rho_floor * rho_floor), g2 / (4.0 * rho_floor * rho_floor));
    let e_floor = (e1 + e2) / (rho_floor * rho_floor);
    let b2 = (g2 - g1) / (3.0 * rho_floor * rho_floor);
    let q_inner = integrate_nested(
        |u| {
            let rho = delta * u.powf(1.0 / (2.0 - alpha));
            if rho < rho_floor {
                return (g1 + b2 * (rho * rho - rho_floor * rho_floor), e_floor);
            }
            let (a, e) = a_of(rho, abs_tol * rho * rho);
            (a / (rho * rho), e / (rho * rho))
        },
        &[0.0, 0.5, 1.0],
        &QuadOpts::new(abs_tol / inner_pref, cfg.tolerance).with_max_panels(100),
    );

    // (ii) shell δ..Ρ in t = ln ρ; compactly supported fields are integrated
    // out to the far edge of their support instead.
    let reach = f.support_radius.map(|s| xr + s);
    let p_eff = reach.unwrap_or(cfg.outer_radius).max(delta);
    let (t0, t1) = (delta.ln(), p_eff.ln());
    let mut breaks: Vec<(f64, bool)> = Vec::new();
    if t1 > t0 {
        let panels = ((t1 - t0) / 0.7).ceil().max(1.0) as usize;
        breaks.extend((0..=panels).map(|i| (t0 + (t1 - t0) * i as f64 / panels as f64, false)));
        for s in &singular {
            for rho in [(s - xr).abs(), s + xr] {
                if rho > delta * 1.0001 && rho < p_eff * 0.9999 {
                    breaks.push((rho.ln(), true));
                }
            }
        }
    }
    let q_mid = if breaks.len() >= 2 {
        let span = t1 - t0;
        integrate_graded(
            &graded_panels(breaks),
            |t| {
                let rho = t.exp();
                let w = rho.powf(-alpha);
                let (a, e) = a_of(rho, abs_tol / (w * span));
                (w * a, w * e)
            },
            &QuadOpts::new(abs_tol, cfg.tolerance).with_max_panels(400),
        )
    } else {
        crate::quad::Quad { value: 0.0, error: 0.0, evals: 0, converged: true }
    };

    // (iii) tail beyond p_eff.
    let sphere_mean = |rho: f64| {
        cap(
            PI,
            &crossings(rho),
            &mut |w| {
                let p = point3(n, x, rho, w, 1.0);
                (ev(&p[..n]), 0.0)
            },
            &QuadOpts::new(abs_tol, 0.1 * cfg.tolerance).with_max_panels(200),
        )
    };
    let weight = p_eff.powf(-alpha);
    let mut tail = fx * area * weight / alpha;
    let mut tail_err = 0.0;
    let compact_done = reach.is_some();
    if !compact_done && beta.is_finite() {
        let m_p = sphere_mean(p_eff);
        let m_half = sphere_mean(0.5 * p_eff);
        tail -= m_p.value * weight / (alpha + beta);
        tail_err = (m_p.value - m_half.value * 0.5f64.powf(beta)).abs() * weight / (alpha + beta)
            + (m_p.error + m_half.error) * weight;
    } else if !compact_done {
        // super-polynomial decay: the remainder is below the sphere mean itself
        let m_p = sphere_mean(p_eff);
        tail_err = m_p.value.abs() * weight / alpha;
    }

    let converged = q_inner.converged && q_mid.converged;
    let value = c * (inner_pref * q_inner.value + q_mid.value + tail);
    let mut error = c * (inner_pref * q_inner.error + q_mid.error + tail_err);
    if flagged {
        error *= 10.0;
    }
    let evaluations = evals.get();
    if evaluations > cfg.max_evaluations || !converged {
        return Err(FracError::BudgetExhausted { budget: cfg.max_evaluations, value, error });
    }
    Ok(EvalResult { value, error_estimate: error, flagged, evaluations })
}
