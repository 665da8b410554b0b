//! Step-by-step numerical replay of the Liouville argument: the extensions
//! `u_k`, the test function `φ = riesz(ψ)`, the pairing `∫ u_k ψ`, and the
//! two estimates that make it vanish.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{FracError, Result};
use crate::field::ScalarField;
use crate::fit::loglog_slope;
use crate::kernels::{poisson_extend, riesz_field, sphere_kernel, PoissonExtension};
use crate::operator::{fraclap_pv, KernelConstants, PvQuadConfig};
use crate::params::{norm, sphere_area, FracParams};
use crate::quad::{integrate_breaks, integrate_nested, uniform_breaks, Quad, QuadOpts};
use crate::report::{Report, Table};
use crate::sphere::sphere_integral;
use crate::spline::CubicSpline;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct I1Row {
    pub k: f64,
    pub r: f64,
    /// `∫_{|y|>k} |u(y)| / (1+|y|)^{n+α} dy`
    pub tail: f64,
    /// `∫_{B_r} |φ|`
    pub phi_mass: f64,
    pub majorant: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct I2Row {
    pub k: f64,
    pub r: f64,
    /// `∫_{|x|>r} f_k φ`
    pub signed: f64,
    /// `∫_{|x|>r} f_k |φ|`, which dominates `|I₂|`
    pub absolute: f64,
    /// `∫_{|x|>r} f_k |x|^{α-n}`
    pub weighted: f64,
    pub majorant: f64,
}

#[derive(Debug, Clone)]
pub struct LiouvilleTrace {
    pub params: FracParams,
    pub psi: ScalarField,
    pub radii_k: Vec<f64>,
    pub pairing_values: Vec<f64>,
    pub i1_values: Vec<I1Row>,
    pub i2_bounds: Vec<I2Row>,
}

impl LiouvilleTrace {
    pub fn tables(&self) -> Vec<Table> {
        let mut pairing = Table::new("k_vs_pairing", &["k", "pairing"]);
        for (k, v) in self.radii_k.iter().zip(&self.pairing_values) {
            pairing.push(vec![*k, *v]);
        }
        let mut i1 = Table::new("k_vs_I1", &["k", "r", "tail", "phi_mass", "majorant"]);
        for row in &self.i1_values {
            i1.push(vec![row.k, row.r, row.tail, row.phi_mass, row.majorant]);
        }
        let mut i2 = Table::new("r_vs_I2", &["k", "r", "I2_signed", "I2_abs", "weighted", "majorant"]);
        for row in &self.i2_bounds {
            i2.push(vec![row.k, row.r, row.signed, row.absolute, row.weighted, row.majorant]);
        }
        vec![pairing, i1, i2]
    }
}

fn require_zero_mean(psi: &ScalarField) -> Result<f64> {
    if !psi.moment_zero {
        return Err(FracError::Precondition(format!("`{}` is not marked zero-mean", psi.label)));
    }
    psi.support_radius
        .ok_or_else(|| FracError::Precondition(format!("`{}` is not compactly supported", psi.label)))
}

/// `φ = riesz(ψ)` for a compactly supported zero-mean `ψ`, returned only
/// after `(-Δ)^{α/2} φ` reproduces `ψ` to 1e-2·max|ψ| at the lobe centers.
pub fn build_phi(psi: &ScalarField, params: &FracParams, k: &KernelConstants) -> Result<ScalarField> {
    let support = require_zero_mean(psi)?;
    let n = params.n;
    if support == 0.0 {
        return Ok(ScalarField::zero(n).with_label(format!("riesz[{}]", psi.label)));
    }
    let phi = riesz_field(psi, params, k)?;
    let mut checks: Vec<Vec<f64>> = psi
        .terms()
        .map(|ts| ts.into_iter().filter(|t| t.coef != 0.0).map(|t| t.shift).collect())
        .unwrap_or_default();
    if checks.is_empty() {
        checks.push(vec![0.0; n]);
    }
    let peak = checks.iter().map(|x| psi.eval(x).abs()).fold(0.0, f64::max);
    let cfg = PvQuadConfig::default().with_tolerance(1e-6);
    for x in &checks {
        let got = fraclap_pv(&phi, x, params, &cfg, k)?.value;
        let residual = (got - psi.eval(x)).abs();
        if !(residual <= 1e-2 * peak) {
            return Err(FracError::ValidationFailed(format!(
                "(-Δ)^(α/2) φ misses ψ by {residual:.3e} at {x:?}"
            )));
        }
    }
    Ok(phi)
}

/// `∫ u_k ψ` for each `k`, by the trapezoid rule on the grid
/// `[-box, box]^n` with `points` nodes per axis.
///
/// `u` must be α-harmonic and nonnegative; constants are the only inputs
/// for which that is known.
pub fn trace_pairing(
    u: &ScalarField,
    psi: &ScalarField,
    radii_k: &[f64],
    half_width: f64,
    points: usize,
    params: &FracParams,
) -> Result<LiouvilleTrace> {
    let support = require_zero_mean(psi)?;
    if radii_k.is_empty() || radii_k.windows(2).any(|w| !(w[1] > w[0])) || !(radii_k[0] > 0.0) {
        return Err(FracError::InvalidInput("radii_k must be positive and strictly increasing".into()));
    }
    if !(half_width > 0.0) || points < 2 {
        return Err(FracError::InvalidInput("need box > 0 and at least 2 points per axis".into()));
    }
    let n = params.n;
    let h = 2.0 * half_width / (points - 1) as f64;
    // nodes where ψ does not vanish, with trapezoid weights
    let total = points.pow(n as u32);
    let nodes: Vec<(Vec<f64>, f64)> = (0..total)
        .filter_map(|flat| {
            let mut x = vec![0.0; n];
            let mut w = h.powi(n as i32);
            let mut rem = flat;
            for d in (0..n).rev() {
                let j = rem % points;
                rem /= points;
                x[d] = -half_width + j as f64 * h;
                if j == 0 || j == points - 1 {
                    w *= 0.5;
                }
            }
            if norm(&x) > support {
                return None;
            }
            let v = psi.eval(&x);
            (v != 0.0).then_some((x, w * v))
        })
        .collect();
    let mut pairing_values = Vec::with_capacity(radii_k.len());
    for &k in radii_k {
        let ext = poisson_extend(u, k, params)?;
        let parts: Vec<f64> = nodes.par_iter().map(|(x, wv)| ext.eval(x) * wv).collect();
        pairing_values.push(parts.iter().sum());
    }
    Ok(LiouvilleTrace {
        params: *params,
        psi: psi.clone(),
        radii_k: radii_k.to_vec(),
        pairing_values,
        i1_values: Vec::new(),
        i2_bounds: Vec::new(),
    })
}

/// `∫_{|y|>k} |u(y)| (1+|y|)^{-n-α} dy`, in `t = ln|y|` with the power-law
/// remainder beyond `k·10⁶` added analytically.
fn weighted_tail(u: &ScalarField, k: f64, params: &FracParams) -> Result<f64> {
    let (n, alpha) = (params.n, params.alpha);
    if !u.certified_in_l_alpha(params) {
        return Err(FracError::TailUnmodeled(format!("`{}` has neither decay metadata nor compact support", u.label)));
    }
    let beta = match (u.support_radius, u.tail_exponent()) {
        (Some(_), _) => f64::INFINITY,
        (None, Some(b)) => b,
        (None, None) => 0.0,
    };
    if let Some(s) = u.support_radius {
        if s <= k {
            return Ok(0.0);
        }
    }
    let opts = QuadOpts::new(1e-300, 1e-10);
    let shell = |rho: f64| -> f64 {
        if u.is_radial {
            let mut p = [0.0; 3];
            p[0] = rho;
            sphere_area(n) * u.eval(&p[..n]).abs()
        } else {
            sphere_integral(
                n,
                |w| {
                    let mut p = [0.0; 3];
                    for d in 0..n {
                        p[d] = rho * w[d];
                    }
                    (u.eval(&p[..n]).abs(), 0.0)
                },
                &opts,
            )
            .value
        }
    };
    let density = |rho: f64| shell(rho) * rho.powi(n as i32) * (1.0 + rho).powf(-params.nf() - alpha);
    let t_end = (k * 1e6).ln().min(u.support_radius.map_or(f64::INFINITY, f64::ln));
    let t0 = k.ln();
    let panels = ((t_end - t0) / 0.5).ceil().max(1.0) as usize;
    let q = integrate_breaks(|t| density(t.exp()), &uniform_breaks(t0, t_end, panels), &opts);
    let tail = if u.support_radius.is_some() { 0.0 } else { density(t_end.exp()) / (alpha + beta) };
    Ok(q.value + tail)
}

/// `∫_{B_r} |φ|` in polar coordinates.
fn abs_mass(phi: &ScalarField, r: f64, n: usize) -> f64 {
    let opts = QuadOpts::new(1e-14, 1e-9);
    integrate_nested(
        |rho| {
            let q = sphere_integral(
                n,
                |w| {
                    let mut p = [0.0; 3];
                    for d in 0..n {
                        p[d] = rho * w[d];
                    }
                    (phi.eval(&p[..n]).abs(), 0.0)
                },
                &opts,
            );
            let j = rho.powi(n as i32 - 1);
            (j * q.value, j * q.error)
        },
        &uniform_breaks(0.0, r, 4),
        &opts,
    )
    .value
}

pub struct I1Outcome {
    pub report: Report,
    pub rows: Vec<I1Row>,
}

/// The I₁ majorant `c ∫_{B_r}|φ| · ∫_{|y|>k} |u|/(1+|y|)^{n+α}` for each k.
///
/// Cases: the majorant decreases in `k`; when both 8 and 32 are in `k_list`,
/// `M(32) <= 0.1·M(8)`; the k-exponent fitted over the four largest
/// `k >= 16` (all `k` if fewer than two qualify) is `α` within 5%.
pub fn check_i1_vanishes(
    u: &ScalarField,
    phi: &ScalarField,
    k_list: &[f64],
    r: f64,
    params: &FracParams,
    kc: &KernelConstants,
) -> Result<I1Outcome> {
    if k_list.is_empty() || k_list.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(FracError::InvalidInput("k_list must be strictly increasing".into()));
    }
    if !(r > 0.0 && r < k_list[0]) {
        return Err(FracError::Precondition(format!("need 0 < r < min k, got r={r}, k={}", k_list[0])));
    }
    let mass = abs_mass(phi, r, params.n);
    let mut rows = Vec::with_capacity(k_list.len());
    for &k in k_list {
        let tail = weighted_tail(u, k, params)?;
        rows.push(I1Row { k, r, tail, phi_mass: mass, majorant: kc.c_pv * mass * tail });
    }
    let mut report = Report::new("I1_vanishes", params);
    let all_zero = rows.iter().all(|row| row.majorant == 0.0);
    if all_zero {
        report.case("majorant vanishes", "max", 0.0, 0.0, true);
    } else {
        let worst = rows.windows(2).map(|w| w[1].majorant / w[0].majorant).fold(0.0, f64::max);
        report.case("majorant decreasing in k", "max M(k_{i+1})/M(k_i)", worst, 1.0, worst < 1.0);
        let at = |k: f64| rows.iter().find(|row| row.k == k).map(|row| row.majorant);
        if let (Some(m8), Some(m32)) = (at(8.0), at(32.0)) {
            report.case_le("M(32) <= 0.1 M(8)", "M(32)/M(8)", m32 / m8, 0.1);
        }
        // the (1+|y|) shift biases small k by O(1/k)
        let mut big: Vec<&I1Row> = rows.iter().filter(|row| row.k >= 16.0).collect();
        big.drain(..big.len().saturating_sub(4));
        let window: Vec<&I1Row> = if big.len() >= 2 { big } else { rows.iter().collect() };
        if window.len() >= 2 {
            let ks: Vec<f64> = window.iter().map(|row| row.k).collect();
            let ms: Vec<f64> = window.iter().map(|row| row.majorant).collect();
            let (slope, _) = loglog_slope(&ks, &ms)?;
            let fitted = -slope;
            report.exponent("I1 majorant k-exponent", fitted, params.alpha);
            let rel = (fitted - params.alpha).abs() / params.alpha;
            report.case_le("I1 majorant k-exponent", "relative error", rel, 0.05);
        }
    }
    let mut table = Table::new("k_vs_I1", &["k", "r", "tail", "phi_mass", "majorant"]);
    for row in &rows {
        table.push(vec![row.k, row.r, row.tail, row.phi_mass, row.majorant]);
    }
    report.table(table);
    Ok(I1Outcome { report, rows })
}

/// Radial profile of `f_k = (-Δ)^{α/2} u_k` on `B_k` for a radial base.
///
/// `f_k (k²-r²)^{α/2}` is splined on `[0, 0.98k]`; the annulus
/// `[0.98k, k]` uses `A (k-r)^{-γ}` fitted on the shells at distance
/// 0.02k, 0.03k, 0.04k from the sphere. Outside `B_k` the density is zero.
#[derive(Debug, Clone)]
pub struct DensityProfile {
    k: f64,
    alpha: f64,
    r_in: f64,
    spline: CubicSpline,
    amp: f64,
    gamma: f64,
}

const PROFILE_NODES: usize = 24;

impl DensityProfile {
    pub fn build(ext: &PoissonExtension, cfg: &PvQuadConfig, kc: &KernelConstants) -> Result<Self> {
        let params = *ext.params();
        if !ext.base().is_radial {
            return Err(FracError::Precondition("the density profile needs a radial base".into()));
        }
        let (k, alpha, n) = (ext.radius(), params.alpha, params.n);
        let field = ext.field();
        let pv_at = |r: f64| -> Result<f64> {
            let mut x = vec![0.0; n];
            x[0] = r;
            Ok(fraclap_pv(&field, &x, &params, cfg, kc)?.value)
        };
        let r_in = 0.98 * k;
        let rs: Vec<f64> = (0..PROFILE_NODES)
            .map(|i| r_in * (0.5 * PI * i as f64 / (PROFILE_NODES - 1) as f64).sin())
            .collect();
        let fs = rs.par_iter().map(|&r| pv_at(r)).collect::<Result<Vec<f64>>>()?;
        let gs: Vec<f64> = rs.iter().zip(&fs).map(|(r, f)| f * (k * k - r * r).powf(0.5 * alpha)).collect();
        let spline = CubicSpline::even(&rs, &gs)?;

        let shells = [fs[PROFILE_NODES - 1], pv_at(0.97 * k)?, pv_at(0.96 * k)?];
        let ds = [0.02 * k, 0.03 * k, 0.04 * k];
        let (amp, gamma) = if shells.iter().all(|f| *f > 0.0) || shells.iter().all(|f| *f < 0.0) {
            let sign = shells[0].signum();
            let logs: Vec<f64> = shells.iter().map(|f| f.abs()).collect();
            let (slope, intercept) = loglog_slope(&ds, &logs)?;
            (sign * intercept.exp(), -slope)
        } else {
            // no definite sign near the sphere: hold the innermost value
            (shells[0], 0.0)
        };
        if gamma >= 1.0 {
            return Err(FracError::TailUnmodeled(format!(
                "density grows like (k-r)^-{gamma:.3} at the sphere, not integrable"
            )));
        }
        Ok(Self { k, alpha, r_in, spline, amp, gamma })
    }

    pub fn radius(&self) -> f64 {
        self.k
    }

    /// Exponent `γ` of the boundary layer `f_k ≈ A (k-r)^{-γ}`.
    pub fn boundary_exponent(&self) -> f64 {
        self.gamma
    }

    pub fn eval_radius(&self, r: f64) -> f64 {
        let k = self.k;
        if r >= k {
            0.0
        } else if r <= self.r_in {
            self.spline.eval(r) * (k * k - r * r).powf(-0.5 * self.alpha)
        } else {
            self.amp * (k - r).powf(-self.gamma)
        }
    }

    /// `∫_lo^hi f_k(ρ) w(ρ) dρ` over `[lo, hi] ∩ [0, k]`.
    pub fn integrate<W: Fn(f64) -> f64>(&self, lo: f64, hi: f64, w: W, opts: &QuadOpts) -> Quad {
        let k = self.k;
        let (lo, hi) = (lo.max(0.0), hi.min(k));
        let mut out = Quad { value: 0.0, error: 0.0, evals: 0, converged: true };
        if hi <= lo {
            return out;
        }
        let mut add = |q: Quad| {
            out.value += q.value;
            out.error += q.error;
            out.evals += q.evals;
            out.converged &= q.converged;
        };
        let a = lo;
        let b = hi.min(self.r_in);
        if b > a {
            add(integrate_breaks(|rho| self.eval_radius(rho) * w(rho), &uniform_breaks(a, b, 8), opts));
        }
        let a = lo.max(self.r_in);
        if hi > a {
            // d = k - ρ, s = d^{1-γ}
            let e = 1.0 - self.gamma;
            let (s_lo, s_hi) = ((k - hi).powf(e), (k - a).powf(e));
            let q = integrate_breaks(|s| w(k - s.powf(1.0 / e)), &uniform_breaks(s_lo, s_hi, 2), opts);
            add(Quad { value: self.amp / e * q.value, error: self.amp.abs() / e * q.error, ..q });
        }
        out
    }
}

/// `sup |φ(x)| |x|^{n-α+1}` over sampled `|x| >= r_min`.
fn decay_constant(phi: &ScalarField, r_min: f64, params: &FracParams) -> f64 {
    let n = params.n;
    let e = params.nf() - params.alpha + 1.0;
    let dirs: Vec<[f64; 3]> = if n == 2 {
        (0..72).map(|i| {
            let t = 2.0 * PI * i as f64 / 72.0;
            [t.cos(), t.sin(), 0.0]
        })
        .collect()
    } else {
        // Fibonacci sphere
        let m = 200;
        let golden = PI * (3.0 - 5f64.sqrt());
        (0..m)
            .map(|i| {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / m as f64;
                let s = (1.0 - z * z).sqrt();
                let t = golden * i as f64;
                [s * t.cos(), s * t.sin(), z]
            })
            .collect()
    };
    let mut best: f64 = 0.0;
    let mut r = r_min;
    while r <= 256.0 * r_min.max(1.0) {
        for w in &dirs {
            let x: Vec<f64> = w[..n].iter().map(|v| v * r).collect();
            best = best.max(phi.eval(&x).abs() * r.powf(e));
        }
        r *= 1.1;
    }
    best
}

pub struct I2Outcome {
    pub report: Report,
    pub rows: Vec<I2Row>,
    /// Fitted decay constant `c` with `|φ(x)| <= c |x|^{-(n-α+1)}`.
    pub decay_constant: f64,
}

/// I₂ against the majorant `(c/r)·u(0)/c_riesz`, where `c` is the decay
/// constant of `φ` and `c_riesz` turns the Riesz identity into
/// `∫_{|x|>r} f_k |x|^{α-n} <= u_k(0)/c_riesz`.
///
/// `φ` is odd for the dipole, so the signed integral is zero by symmetry;
/// the bound is checked on `∫ f_k |φ|`, which dominates it.
pub fn check_i2_bound(
    u: &ScalarField,
    k: f64,
    r_list: &[f64],
    phi: &ScalarField,
    params: &FracParams,
    cfg: &PvQuadConfig,
    kc: &KernelConstants,
) -> Result<I2Outcome> {
    if r_list.is_empty() || r_list.windows(2).any(|w| !(w[1] > w[0])) || !(r_list[0] > 0.0) {
        return Err(FracError::InvalidInput("r_list must be positive and strictly increasing".into()));
    }
    let n = params.n;
    let ext = poisson_extend(u, k, params)?;
    let profile = DensityProfile::build(&ext, cfg, kc)?;
    let u0 = u.eval(&vec![0.0; n]);
    if u0 < 0.0 {
        return Err(FracError::Precondition("u must be nonnegative".into()));
    }
    let c_phi = decay_constant(phi, r_list[0], params);
    let opts = QuadOpts::new(1e-13 * (1.0 + u0), 1e-8);
    let sphere_opts = QuadOpts::new(1e-14, 1e-9);
    let sphere_mean = |rho: f64, abs: bool| -> f64 {
        sphere_integral(
            n,
            |w| {
                let mut p = [0.0; 3];
                for d in 0..n {
                    p[d] = rho * w[d];
                }
                let v = phi.eval(&p[..n]);
                (if abs { v.abs() } else { v }, 0.0)
            },
            &sphere_opts,
        )
        .value
    };
    let area = sphere_area(n);
    let mut rows = Vec::with_capacity(r_list.len());
    for &r in r_list {
        let jac = |rho: f64| rho.powi(n as i32 - 1);
        let signed = profile.integrate(r, k, |rho| jac(rho) * sphere_mean(rho, false), &opts).value;
        let absolute = profile.integrate(r, k, |rho| jac(rho) * sphere_mean(rho, true), &opts).value;
        let weighted = profile.integrate(r, k, |rho| area * rho.powf(params.alpha - 1.0), &opts).value;
        let majorant = c_phi / r * u0 / kc.c_riesz;
        rows.push(I2Row { k, r, signed, absolute, weighted, majorant });
    }

    let mut report = Report::new("I2_bound", params);
    report.case("phi decay constant (fitted)", "c", c_phi, f64::INFINITY, c_phi.is_finite());
    let bound20 = u0 / kc.c_riesz;
    for row in &rows {
        let r = row.r;
        if r >= k {
            report.case_le(format!("|I2(r={r})| beyond the ball"), "abs", row.absolute, 1e-3);
            continue;
        }
        report.case_le(format!("int f_k|phi| <= majorant (r={r})"), "ratio", row.absolute / row.majorant, 1.0);
        report.case_le(
            format!("|I2| <= int f_k|phi| (r={r})"),
            "abs",
            row.signed.abs(),
            row.absolute * (1.0 + 1e-9) + 1e-12,
        );
        report.case_le(format!("weighted mass <= u(0)/c (r={r})"), "ratio", row.weighted / bound20, 1.0 + 1e-3);
    }
    if u0 > 0.0 {
        let worst = rows.windows(2).map(|w| w[1].absolute / w[0].absolute).fold(0.0, f64::max);
        report.case("int f_k|phi| decreasing in r", "max ratio", worst, 1.0, worst < 1.0 || rows.len() < 2);
        let bound = c_phi * u0 / kc.c_riesz;
        let worst = rows.iter().map(|row| row.r * row.absolute).fold(0.0, f64::max);
        report.case_le("r * int f_k|phi| bounded", "max r*I2", worst, bound);
    } else {
        let worst = rows.iter().map(|row| row.absolute).fold(0.0, f64::max);
        report.case_le("I2 vanishes", "max abs", worst, 0.0);
    }
    let mut table = Table::new("r_vs_I2", &["k", "r", "I2_signed", "I2_abs", "weighted", "majorant"]);
    for row in &rows {
        table.push(vec![row.k, row.r, row.signed, row.absolute, row.weighted, row.majorant]);
    }
    report.table(table);
    Ok(I2Outcome { report, rows, decay_constant: c_phi })
}

/// `c_riesz ∫ f_k(y) |x-y|^{α-n} dy` against `u_k(x)` at points outside
/// `B_k`; cases pass at 5% relative.
pub fn verify_riesz_inversion(
    u: &ScalarField,
    k: f64,
    test_points: &[Vec<f64>],
    params: &FracParams,
    cfg: &PvQuadConfig,
    kc: &KernelConstants,
) -> Result<Report> {
    for x in test_points {
        params.check_point(x)?;
        if !(norm(x) > k) {
            return Err(FracError::Precondition(format!("test point {x:?} is not outside B_k")));
        }
    }
    let ext = poisson_extend(u, k, params)?;
    let profile = DensityProfile::build(&ext, cfg, kc)?;
    let (n, alpha) = (params.n, params.alpha);
    let opts = QuadOpts::new(1e-15, 1e-9);
    let mut report = Report::new("riesz_inversion", params);
    for x in test_points {
        let r = norm(x);
        let lhs = kc.c_riesz
            * profile
                .integrate(0.0, k, |rho| rho.powi(n as i32 - 1) * sphere_kernel(n, alpha, r, rho), &opts)
                .value;
        let rhs = ext.eval(x);
        let rel = if lhs == 0.0 && rhs == 0.0 { 0.0 } else { (lhs - rhs).abs() / rhs.abs() };
        report.case_le(format!("riesz(f_k) = u_k at {x:?}"), "relative", rel, 0.05);
    }
    Ok(report)
}
