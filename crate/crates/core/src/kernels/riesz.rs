//! Riesz potential `c ∫ f(y) |x-y|^{α-n} dy`.

use std::cell::Cell;
use std::sync::Arc;

use crate::error::{FracError, Result};
use crate::field::{EvalFn, ScalarField};
use crate::operator::constants::KernelConstants;
use crate::operator::pv::EvalResult;
use crate::params::{norm, FracParams};
use crate::quad::QuadOpts;
use crate::sphere::sphere_integral;
use crate::spline::CubicSpline;

use super::{ball_integral, sphere_kernel};

/// Radius beyond which a non-compact integrand is handled by its tail model.
const OUTER: f64 = 64.0;

pub fn riesz_potential(f: &ScalarField, x: &[f64], params: &FracParams, k: &KernelConstants) -> Result<EvalResult> {
    k.require(params)?;
    riesz_unchecked(f, x, params, k.c_riesz)
}

fn probe_scale(f: &ScalarField, x: &[f64]) -> f64 {
    let n = f.dim();
    let reach = f.support_radius.unwrap_or(4.0);
    let mut s = f.eval(x).abs();
    for t in [0.0, 0.25, 0.5, 0.75] {
        for d in 0..n {
            for sign in [-1.0, 1.0] {
                let mut p = [0.0; 3];
                p[d] = sign * t * reach;
                s = s.max(f.eval(&p[..n]).abs());
            }
        }
    }
    s
}

pub(crate) fn riesz_unchecked(f: &ScalarField, x: &[f64], params: &FracParams, c: f64) -> Result<EvalResult> {
    params.check_point(x)?;
    let n = params.n;
    let alpha = params.alpha;
    let evals = Cell::new(0usize);
    let h = |p: &[f64]| {
        evals.set(evals.get() + 1);
        f.eval(p)
    };
    let scale = probe_scale(f, x);
    if scale == 0.0 && f.support_radius.is_some() {
        return Ok(EvalResult::exact(0.0));
    }
    let opts = QuadOpts::new(1e-13 * scale.max(1e-300), 1e-10).with_max_panels(400);
    if f.is_radial && n == 3 {
        return radial_riesz(f, norm(x), params, c, &opts, scale, &evals);
    }
    // by linearity; the direct cone quadrature stalls on the lobes in 3D
    if let (3, Some(terms)) = (n, f.radial_terms.as_ref()) {
        let mut out = EvalResult::exact(0.0);
        for t in terms.iter().filter(|t| t.coef != 0.0) {
            let y: Vec<f64> = x.iter().zip(&t.shift).map(|(a, b)| a - b).collect();
            let e = radial_riesz(&t.profile, norm(&y), params, c, &opts, scale, &evals)?;
            out.value += t.coef * e.value;
            out.error_estimate += t.coef.abs() * e.error_estimate;
        }
        out.evaluations = evals.get();
        return Ok(out);
    }
    let (value, error, converged) = match f.support_radius {
        Some(rs) => {
            let q = ball_integral(n, alpha, x, &vec![0.0; n], rs, h, &opts, f.is_radial);
            (q.value, q.error, q.converged)
        }
        None => {
            let beta = match f.tail_exponent() {
                Some(b) if b > alpha => b,
                Some(b) => {
                    return Err(FracError::Divergent(format!(
                        "`{}` decays like |x|^-{b}, not faster than |x|^-alpha",
                        f.label
                    )))
                }
                None => return Err(FracError::TailUnmodeled(f.label.clone())),
            };
            let p_out = OUTER * (1.0 + norm(x));
            let q = ball_integral(n, alpha, x, x, p_out, h, &opts, f.is_radial);
            // ∫_{|y-x|>P} ≈ M(P) P^α / (β - α) with M the sphere integral
            let mean = |rho: f64| {
                sphere_integral(
                    n,
                    |w| {
                        let mut p = [0.0; 3];
                        for a in 0..n {
                            p[a] = x[a] + rho * w[a];
                        }
                        (f.eval(&p[..n]), 0.0)
                    },
                    &QuadOpts::new(1e-300, 1e-10),
                )
                .value
            };
            if beta.is_finite() {
                let (m, m2) = (mean(p_out), mean(0.5 * p_out));
                let tail = m * p_out.powf(alpha) / (beta - alpha);
                let tail_err = (m - m2 * 0.5f64.powf(beta)).abs() * p_out.powf(alpha) / (beta - alpha);
                (q.value + tail, q.error + tail_err, q.converged)
            } else {
                let m = mean(p_out);
                (q.value, q.error + m.abs() * p_out.powf(alpha), q.converged)
            }
        }
    };
    if !converged && error > 1e-6 * value.abs().max(scale) {
        return Err(FracError::BudgetExhausted { budget: opts.max_panels, value: c * value, error: c * error });
    }
    Ok(EvalResult { value: c * value, error_estimate: c * error, flagged: false, evaluations: evals.get() })
}

/// `∫_lo^hi g(ρ) dρ` where `g` has an integrable singularity `|ρ - r|^{α-1}`
/// (or a logarithm) at an endpoint equal to `r`; `ρ = r ± |hi-lo| s^q`
/// flattens it.
fn singular_segment<G: Fn(f64) -> f64>(g: G, r: f64, other: f64, alpha: f64, opts: &QuadOpts) -> crate::quad::Quad {
    let q = (1.0 / alpha).max(2.0);
    let len = other - r;
    crate::quad::integrate(
        |s| {
            let rho = r + len * s.powf(q);
            g(rho) * len.abs() * q * s.powf(q - 1.0)
        },
        0.0,
        1.0,
        opts,
    )
}

fn doubling_breaks(lo: f64, hi: f64) -> Vec<f64> {
    let mut b = vec![lo];
    let mut t = lo.max(0.25 * (hi - lo).min(1.0));
    while t < hi {
        if t > lo {
            b.push(t);
        }
        t *= 2.0;
    }
    b.push(hi);
    b
}

/// Radial source in 3D: `c ∫ f(ρ) ρ² S(r, ρ) dρ` with the closed-form
/// sphere mean `S`.
fn radial_riesz(
    f: &ScalarField,
    r: f64,
    params: &FracParams,
    c: f64,
    opts: &QuadOpts,
    scale: f64,
    evals: &Cell<usize>,
) -> Result<EvalResult> {
    let (n, alpha) = (params.n, params.alpha);
    let prof = |rho: f64| {
        evals.set(evals.get() + 1);
        let mut p = [0.0; 3];
        p[0] = rho;
        f.eval(&p[..n])
    };
    let g = |rho: f64| prof(rho) * rho * rho * sphere_kernel(n, alpha, r, rho);
    let (end, beta) = match f.support_radius {
        Some(rs) => (rs, None),
        None => match f.tail_exponent() {
            Some(b) if b > alpha => (OUTER * (1.0 + r), Some(b)),
            Some(b) => {
                return Err(FracError::Divergent(format!(
                    "`{}` decays like |x|^-{b}, not faster than |x|^-alpha",
                    f.label
                )))
            }
            None => return Err(FracError::TailUnmodeled(f.label.clone())),
        },
    };
    let mut parts = Vec::new();
    if r > 0.0 && r < end {
        parts.push(singular_segment(g, r, 0.0, alpha, opts));
        let b = (2.0 * r).min(end);
        parts.push(singular_segment(g, r, b, alpha, opts));
        if b < end {
            parts.push(crate::quad::integrate_breaks(&g, &doubling_breaks(b, end), opts));
        }
    } else {
        let mut br = doubling_breaks(0.0, end);
        if r > 0.0 && r < 2.0 * end {
            // close to the edge the kernel is sharply peaked
            br.push(end - 0.5 * (r - end).abs().min(end));
            br.sort_by(f64::total_cmp);
            br.dedup();
        }
        parts.push(crate::quad::integrate_breaks(&g, &br, opts));
    }
    let mut value: f64 = parts.iter().map(|q| q.value).sum();
    let mut error: f64 = parts.iter().map(|q| q.error).sum();
    let converged = parts.iter().all(|q| q.converged);
    if let Some(beta) = beta.filter(|b| b.is_finite()) {
        // f(ρ) ρ² S(r, ρ) ≈ 4π f(ρ) ρ^{α-1} beyond `end`
        let area = crate::params::sphere_area(n);
        let tail = area * prof(end) * end.powf(alpha) / (beta - alpha);
        let ratio = prof(end) / prof(0.5 * end) * 2f64.powf(beta);
        value += tail;
        error += (tail * (ratio - 1.0)).abs();
    }
    if !converged && error > 1e-6 * value.abs().max(scale) {
        return Err(FracError::BudgetExhausted { budget: opts.max_panels, value: c * value, error: c * error });
    }
    Ok(EvalResult { value: c * value, error_estimate: c * error, flagged: false, evaluations: evals.get() })
}

/// Riesz potential of a radial field, tabulated on a spline in `r` so that
/// it can be evaluated cheaply (e.g. inside PV quadratures).
pub fn riesz_radial_field(f: &ScalarField, params: &FracParams, k: &KernelConstants) -> Result<ScalarField> {
    k.require(params)?;
    riesz_radial_field_unchecked(f, params, k.c_riesz)
}

pub(crate) fn riesz_radial_field_unchecked(f: &ScalarField, params: &FracParams, c: f64) -> Result<ScalarField> {
    if !f.is_radial {
        return Err(FracError::Precondition(format!("`{}` is not radial", f.label)));
    }
    let n = params.n;
    let e = params.nf() - params.alpha;
    let scale = f.support_radius.unwrap_or(1.0);
    let mut rs: Vec<f64> = (0..=100).map(|i| 2.0 * scale * i as f64 / 100.0).collect();
    let r_end = 512.0 * scale;
    while *rs.last().unwrap() < r_end {
        let next = rs.last().unwrap() * 1.02;
        rs.push(next);
    }
    let mut ys = Vec::with_capacity(rs.len());
    for &r in &rs {
        let mut x = vec![0.0; n];
        x[0] = r;
        let v = riesz_unchecked(f, &x, params, c)?.value;
        ys.push(v * (1.0 + r * r).powf(0.5 * e));
    }
    let y_end = *ys.last().unwrap();
    let r_last = *rs.last().unwrap();
    let spline = Arc::new(CubicSpline::even(&rs, &ys)?);
    let decay = match f.tail_exponent() {
        Some(b) => (b - params.alpha).min(e),
        None => e,
    };
    let out = ScalarField::radial(n, format!("riesz[{}]", f.label), move |r| {
        let y = if r <= r_last { spline.eval(r) } else { y_end };
        y * (1.0 + r * r).powf(-0.5 * e)
    })
    .with_bounded()
    .with_decay(decay);
    Ok(out)
}

/// Riesz potential as a field, from the translated-radial decomposition of
/// `f`: each radial profile is tabulated once and the terms are summed.
/// Zero-mean sources get the improved decay `n - α + 1`.
pub fn riesz_field(f: &ScalarField, params: &FracParams, k: &KernelConstants) -> Result<ScalarField> {
    k.require(params)?;
    let terms = f
        .terms()
        .ok_or_else(|| FracError::Precondition(format!("`{}` has no radial decomposition", f.label)))?;
    let mut parts: Vec<(f64, Vec<f64>, ScalarField)> = Vec::with_capacity(terms.len());
    let mut tabulated: Vec<(EvalFn, ScalarField)> = Vec::new();
    for t in terms {
        // terms sharing one profile reuse its table
        let key = t.profile.eval_raw_ptr();
        let field = match tabulated.iter().find(|(p, _)| Arc::ptr_eq(p, &key)) {
            Some((_, fld)) => fld.clone(),
            None => {
                let fld = riesz_radial_field_unchecked(&t.profile, params, k.c_riesz)?;
                tabulated.push((key, fld.clone()));
                fld
            }
        };
        parts.push((t.coef, t.shift, field));
    }
    let n = params.n;
    let parts = Arc::new(parts);
    let eval_parts = parts.clone();
    let mut out = ScalarField::new(n, format!("riesz[{}]", f.label), move |x| {
        let mut s = 0.0;
        for (coef, shift, fld) in eval_parts.iter() {
            let mut y = [0.0; 3];
            for d in 0..x.len() {
                y[d] = x[d] - shift[d];
            }
            s += coef * fld.eval(&y[..x.len()]);
        }
        s
    })
    .with_bounded();
    let e = params.nf() - params.alpha;
    out.decay_exponent = Some(if f.moment_zero { e + 1.0 } else { e });
    out.is_radial = f.is_radial;
    Ok(out)
}
