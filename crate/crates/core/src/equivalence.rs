//! The PDE and the integral equation `u = c_riesz ∫ u^p |x-y|^{α-n}`: the
//! bubble family, the ball approximations `v_R`, and the divergence that
//! rules out an additive constant.

use rayon::prelude::*;

use crate::error::{FracError, Result};
use crate::field::{make_catalog_field, ScalarField};
use crate::fit::loglog_slope;
use crate::kernels::{ball_integral, green_solve_ball, riesz_potential};
use crate::operator::{fraclap_pv, fraclap_spectral_points, KernelConstants, PvQuadConfig, SpectralConfig};
use crate::params::{norm, FracParams};
use crate::quad::QuadOpts;
use crate::report::{Report, Table};

#[derive(Debug, Clone, PartialEq)]
pub struct BubbleOptions {
    pub pv: PvQuadConfig,
    /// Grid for the spectral cross-check; centered on `x0` unless a center
    /// is set.
    pub spectral: SpectralConfig,
    /// Exponent in the ratio `fraclap(u)/u^p`; the critical value by default.
    pub p: Option<f64>,
}

impl BubbleOptions {
    pub fn for_dim(n: usize) -> Self {
        Self { pv: PvQuadConfig::default(), spectral: SpectralConfig::for_dim(n), p: None }
    }
}

#[derive(Debug, Clone)]
pub struct BubbleOutcome {
    pub report: Report,
    pub pv_ratios: Vec<f64>,
    pub spectral_ratios: Vec<f64>,
    pub mean: f64,
    /// `(max - min) / mean` of the PV ratios.
    pub spread: f64,
}

/// Ratio test for `u = (t/(t²+|x-x0|²))^{(n-α)/2}`: `fraclap(u)/u^p` must be
/// constant to 1% over the test points, PV and spectral values must agree to
/// 1e-3, and the mean ratio must be positive.
pub fn verify_bubble(
    t: f64,
    x0: &[f64],
    params: &FracParams,
    test_points: &[Vec<f64>],
    opts: &BubbleOptions,
    kc: &KernelConstants,
) -> Result<BubbleOutcome> {
    params.check_point(x0)?;
    if !(t > 0.0) {
        return Err(FracError::InvalidInput(format!("bubble scale must be positive, got {t}")));
    }
    if test_points.is_empty() {
        return Err(FracError::InvalidInput("no test points".into()));
    }
    for (i, x) in test_points.iter().enumerate() {
        params.check_point(x)?;
        if test_points[..i].iter().any(|y| y == x) {
            return Err(FracError::InvalidInput(format!("duplicate test point {x:?}")));
        }
    }
    let p = opts.p.unwrap_or_else(|| params.critical_p());
    let mut args = vec![t];
    args.extend_from_slice(x0);
    let u = make_catalog_field("bubble", params, &args)?;
    let spec_cfg = match opts.spectral.center {
        Some(_) => opts.spectral.clone(),
        None => opts.spectral.clone().centered(x0),
    };
    let spectral = fraclap_spectral_points(&u, test_points, params, &spec_cfg, kc)?;
    let pv = test_points
        .par_iter()
        .map(|x| fraclap_pv(&u, x, params, &opts.pv, kc).map(|e| e.value))
        .collect::<Result<Vec<f64>>>()?;

    let mut report = Report::new("bubble", params);
    let mut pv_ratios = Vec::with_capacity(pv.len());
    let mut spectral_ratios = Vec::with_capacity(pv.len());
    for ((x, a), b) in test_points.iter().zip(&pv).zip(&spectral) {
        let up = u.eval(x).powf(p);
        pv_ratios.push(a / up);
        spectral_ratios.push(b / up);
        report.case_le(format!("PV vs spectral at {x:?}"), "relative", (a - b).abs() / b.abs(), 1e-3);
    }
    let mean = pv_ratios.iter().sum::<f64>() / pv_ratios.len() as f64;
    let hi = pv_ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = pv_ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = (hi - lo) / mean.abs();
    report.case_le("ratio spread", "(max-min)/mean", spread, 0.01);
    report.case("mean ratio positive", "mean", mean, 0.0, mean > 0.0);
    Ok(BubbleOutcome { report, pv_ratios, spectral_ratios, mean, spread })
}

/// For each `R`: `v_R = G_R[u^p]` against `v = c_riesz ∫ u^p |x-y|^{α-n}`.
///
/// Cases: `w_R = u - v_R >= -1e-3`; `sup_x |v_R - v|` decreases in `R` and
/// ends at most 2% of `max u`; `|u - v| <= 2% u`; `v_R` is nondecreasing
/// in `R` at every point. Tables `R_vs_supdiff` and `w_R`.
pub fn verify_pde_to_integral(
    u: &ScalarField,
    p: f64,
    r_list: &[f64],
    params: &FracParams,
    test_points: &[Vec<f64>],
    kc: &KernelConstants,
) -> Result<Report> {
    if r_list.is_empty() || r_list.windows(2).any(|w| !(w[1] > w[0])) || !(r_list[0] > 0.0) {
        return Err(FracError::InvalidInput("R_list must be positive and strictly increasing".into()));
    }
    if !(p > 1.0) {
        return Err(FracError::InvalidInput(format!("exponent p must exceed 1, got {p}")));
    }
    for x in test_points {
        params.check_point(x)?;
        if !(norm(x) < r_list[0]) {
            return Err(FracError::Precondition(format!("test point {x:?} lies outside B_{}", r_list[0])));
        }
    }
    let up = u.powf(p);
    let v = test_points
        .par_iter()
        .map(|x| riesz_potential(&up, x, params, kc).map(|e| e.value))
        .collect::<Result<Vec<f64>>>()?;
    let jobs: Vec<(usize, usize)> = (0..r_list.len()).flat_map(|i| (0..test_points.len()).map(move |j| (i, j))).collect();
    let flat = jobs
        .par_iter()
        .map(|&(i, j)| green_solve_ball(&up, r_list[i], &test_points[j], params).map(|e| e.value))
        .collect::<Result<Vec<f64>>>()?;
    let m = test_points.len();
    let vr = |i: usize, j: usize| flat[i * m + j];
    let us: Vec<f64> = test_points.iter().map(|x| u.eval(x)).collect();
    let max_u = us.iter().cloned().fold(0.0, f64::max);

    let mut report = Report::new("pde_to_integral", params);
    let mut w_table = Table::new("w_R", &["R", "point", "w"]);
    let mut sup_table = Table::new("R_vs_supdiff", &["R", "supdiff"]);
    let mut min_w = f64::INFINITY;
    let mut sups = Vec::with_capacity(r_list.len());
    for (i, &r) in r_list.iter().enumerate() {
        let mut sup: f64 = 0.0;
        for j in 0..m {
            let w = us[j] - vr(i, j);
            min_w = min_w.min(w);
            w_table.push(vec![r, j as f64, w]);
            sup = sup.max((vr(i, j) - v[j]).abs());
        }
        sup_table.push(vec![r, sup]);
        sups.push(sup);
    }
    report.case("w_R >= -1e-3", "min w_R", min_w, -1e-3, min_w >= -1e-3);
    let monotone = sups.windows(2).all(|w| w[1] <= w[0]);
    let worst = sups.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    report.case("sup|v_R - v| decreasing in R", "max increment", worst.max(0.0), 0.0, monotone);
    let last = *sups.last().unwrap_or(&0.0);
    let rel_last = if max_u > 0.0 { last / max_u } else { last };
    report.case_le(format!("sup|v_R - v| at R={}", r_list[r_list.len() - 1]), "relative to max u", rel_last, 0.02);
    for j in 0..m {
        let diff = (us[j] - v[j]).abs();
        let rel = if us[j] > 0.0 { diff / us[j] } else { diff };
        report.case_le(format!("u = v at {:?}", test_points[j]), "relative", rel, 0.02);
    }
    let mut worst_drop: f64 = 0.0;
    for j in 0..m {
        for i in 1..r_list.len() {
            worst_drop = worst_drop.max(vr(i - 1, j) - vr(i, j));
        }
    }
    report.case_le("v_R nondecreasing in R", "max decrease", worst_drop, 1e-9 * max_u.max(1e-300));
    report.table(sup_table);
    report.table(w_table);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivergenceVerdict {
    /// Growth like `R^α` witnessed along the list.
    Diverges,
    /// `C = 0`: every truncation vanishes.
    NoDivergence,
    /// `C > 0` but the growth was not confirmed.
    NotWitnessed,
}

#[derive(Debug, Clone)]
pub struct DivergenceOutcome {
    pub report: Report,
    pub verdict: DivergenceVerdict,
    pub fitted_exponent: Option<f64>,
}

/// `T(R) = c_riesz C^p ∫_{B_R(x)} |x-y|^{α-n} dy` at the critical `p`.
/// Passes when `T` increases along the list and its fitted growth exponent
/// is `α` within 1%.
pub fn divergence_check(
    params: &FracParams,
    c: f64,
    r_list: &[f64],
    x: &[f64],
    kc: &KernelConstants,
) -> Result<DivergenceOutcome> {
    params.check_point(x)?;
    if !(c >= 0.0 && c.is_finite()) {
        return Err(FracError::InvalidInput(format!("C must be nonnegative, got {c}")));
    }
    if r_list.len() < 2 || r_list.windows(2).any(|w| !(w[1] > w[0])) || !(r_list[0] > 0.0) {
        return Err(FracError::InvalidInput("R_list must be positive and strictly increasing".into()));
    }
    if r_list[r_list.len() - 1] < 4.0 * r_list[0] {
        return Err(FracError::InvalidInput("R_list must span at least two dyads".into()));
    }
    let (n, alpha) = (params.n, params.alpha);
    let amp = kc.c_riesz * c.powf(params.critical_p());
    let mut table = Table::new("T_R", &["R", "T"]);
    let ts: Vec<f64> = r_list
        .iter()
        .map(|&r| amp * ball_integral(n, alpha, x, x, r, |_| 1.0, &QuadOpts::new(1e-300, 1e-13), false).value)
        .collect();
    for (r, t) in r_list.iter().zip(&ts) {
        table.push(vec![*r, *t]);
    }
    let mut report = Report::new("divergence", params);
    if c == 0.0 {
        report.case("divergence witnessed", "max T", 0.0, f64::INFINITY, false);
        report.table(table);
        return Ok(DivergenceOutcome { report, verdict: DivergenceVerdict::NoDivergence, fitted_exponent: None });
    }
    let (slope, _) = loglog_slope(r_list, &ts)?;
    report.exponent("T(R) growth", slope, alpha);
    let rel = (slope - alpha).abs() / alpha;
    let ok_fit = report.case_le("growth exponent", "relative error", rel, 0.01);
    let increasing = ts.windows(2).all(|w| w[1] > w[0]);
    let ok_inc = report.case("T(R) increasing", "T(R_max)/T(R_min)", ts[ts.len() - 1] / ts[0], 1.0, increasing);
    report.table(table);
    let verdict = if ok_fit && ok_inc { DivergenceVerdict::Diverges } else { DivergenceVerdict::NotWitnessed };
    Ok(DivergenceOutcome { report, verdict, fitted_exponent: Some(slope) })
}
