//! Adaptive Gauss-Kronrod (10/21) quadrature with global bisection.
//!
//! Integrands may return a second component, the error density of an
//! inner (nested) integral, which is integrated with the Kronrod weights and
//! added to the panel error. That keeps the reported error honest for the
//! two- and three-level nested integrals used throughout the crate.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_600_576,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod abscissae.
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOpts {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl QuadOpts {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol, rel_tol, max_panels: 400 }
    }

    pub fn with_max_panels(mut self, max_panels: usize) -> Self {
        self.max_panels = max_panels;
        self
    }
}

impl Default for QuadOpts {
    fn default() -> Self {
        Self::new(1e-12, 1e-10)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
    pub converged: bool,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rescale_error(diff: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = diff.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    err
}

/// One 21-point Kronrod panel. Returns (value, error).
fn gk21<F: FnMut(f64) -> (f64, f64)>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = half.abs();

    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    let (fc, ec) = f(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut inner_err = ec.abs() * WGK[10];

    for j in 0..10 {
        let dx = half * XGK[j];
        let (f1, e1) = f(center - dx);
        let (f2, e2) = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        inner_err += WGK[j] * (e1.abs() + e2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_k * half;
    let err = rescale_error((res_k - res_g) * half, res_abs * abs_half, res_asc * abs_half);
    (value, err + inner_err * abs_half)
}

/// Integrates `f` over the union of consecutive intervals given by `breaks`.
/// The integrand returns `(value, inner_error)`.
pub fn integrate_nested<F>(mut f: F, breaks: &[f64], opts: &QuadOpts) -> Quad
where
    F: FnMut(f64) -> (f64, f64),
{
    assert!(breaks.len() >= 2, "need at least one interval");
    let mut heap = BinaryHeap::new();
    let mut evals = 0;
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in breaks.windows(2) {
        if w[0] == w[1] {
            continue;
        }
        let (v, e) = gk21(&mut f, w[0], w[1]);
        evals += 21;
        total += v;
        total_err += e;
        heap.push(Panel { a: w[0], b: w[1], value: v, error: e });
    }
    if heap.is_empty() {
        return Quad { value: 0.0, error: 0.0, evals, converged: true };
    }

    let mut converged = false;
    // Panels too narrow to split further are parked here.
    let mut frozen_value = 0.0;
    let mut frozen_err = 0.0;
    let mut iterations = 0usize;
    loop {
        let target = opts.abs_tol.max(opts.rel_tol * total.abs());
        if total_err <= target {
            converged = true;
            break;
        }
        if heap.len() >= opts.max_panels {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a.min(worst.b) && mid < worst.a.max(worst.b))
            || (worst.b - worst.a).abs() <= 1e-14 * (worst.a.abs() + worst.b.abs())
        {
            frozen_value += worst.value;
            frozen_err += worst.error;
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let (v1, e1) = gk21(&mut f, worst.a, mid);
        let (v2, e2) = gk21(&mut f, mid, worst.b);
        evals += 42;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });

        iterations += 1;
        if iterations.is_multiple_of(64) {
            // resum to keep incremental drift out of the stopping test
            total = frozen_value + heap.iter().map(|p| p.value).sum::<f64>();
            total_err = frozen_err + heap.iter().map(|p| p.error).sum::<f64>();
        }
    }
    let value = frozen_value + heap.iter().map(|p| p.value).sum::<f64>();
    let error = frozen_err + heap.iter().map(|p| p.error).sum::<f64>();
    let converged = converged || error <= opts.abs_tol.max(opts.rel_tol * value.abs());
    Quad { value, error, evals, converged }
}

pub fn integrate_breaks<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], opts: &QuadOpts) -> Quad {
    integrate_nested(|t| (f(t), 0.0), breaks, opts)
}

pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadOpts) -> Quad {
    integrate_breaks(f, &[a, b], opts)
}

/// `n+1` equally spaced break points on `[a, b]`.
pub fn uniform_breaks(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

/// Panels between sorted, merged break points; a point flagged `true` is a
/// seam, and a panel with seams at both ends is split in half.
pub fn graded_panels(mut b: Vec<(f64, bool)>) -> Vec<(f64, f64, bool, bool)> {
    b.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut merged: Vec<(f64, bool)> = Vec::with_capacity(b.len());
    for (t, s) in b {
        match merged.last_mut() {
            Some(last) if (t - last.0).abs() < 1e-12 => last.1 |= s,
            _ => merged.push((t, s)),
        }
    }
    let mut out = Vec::new();
    for w in merged.windows(2) {
        let ((a, sa), (b, sb)) = (w[0], w[1]);
        if sa && sb {
            let m = 0.5 * (a + b);
            out.push((a, m, true, false));
            out.push((m, b, false, true));
        } else {
            out.push((a, b, sa, sb));
        }
    }
    out
}

/// Integrates over panels `(a, b, graded_a, graded_b)`. A graded end uses
/// `x - x* ∝ s⁴`, which turns Hölder seams at that end into smooth
/// integrands.
pub fn integrate_graded<F>(panels: &[(f64, f64, bool, bool)], mut f: F, opts: &QuadOpts) -> Quad
where
    F: FnMut(f64) -> (f64, f64),
{
    let breaks: Vec<f64> = (0..=panels.len()).map(|i| i as f64).collect();
    integrate_nested(
        |t| {
            let i = (t.floor() as usize).min(panels.len() - 1);
            let s = t - i as f64;
            let (a, b, sa, sb) = panels[i];
            let h = b - a;
            let (theta, jac) = if sa {
                (a + h * s.powi(4), 4.0 * h * s.powi(3))
            } else if sb {
                (b - h * (1.0 - s).powi(4), 4.0 * h * (1.0 - s).powi(3))
            } else {
                (a + h * s, h)
            };
            if jac == 0.0 {
                return (0.0, 0.0);
            }
            let (v, e) = f(theta);
            (jac * v, jac * e)
        },
        &breaks,
        opts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact_on_one_panel() {
        let q = integrate(|x| x.powi(7) - 3.0 * x * x, -1.0, 2.0, &QuadOpts::default());
        let exact = (2f64.powi(8) - 1.0) / 8.0 - (8.0 + 1.0);
        assert!((q.value - exact).abs() < 1e-12);
        assert_eq!(q.evals, 21);
        assert!(q.converged);
    }

    #[test]
    fn endpoint_singularity_converges() {
        // ∫_0^1 x^{-1/2} dx = 2
        let q = integrate(|x| x.powf(-0.5), 0.0, 1.0, &QuadOpts::new(1e-10, 1e-10).with_max_panels(2000));
        assert!((q.value - 2.0).abs() < 1e-8, "{q:?}");
    }

    #[test]
    fn oscillatory_integrand() {
        let q = integrate(|x| (20.0 * x).cos(), 0.0, std::f64::consts::PI, &QuadOpts::default());
        assert!(q.value.abs() < 1e-10);
    }

    #[test]
    fn nested_errors_are_accumulated() {
        let q = integrate_nested(|_| (1.0, 0.5), &[0.0, 2.0], &QuadOpts::default());
        assert!((q.value - 2.0).abs() < 1e-14);
        assert!((q.error - 1.0).abs() < 1e-12);
        assert!(!q.converged);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let q = integrate(|x| (1.0 / x).sin(), 1e-6, 1.0, &QuadOpts::new(1e-14, 1e-14).with_max_panels(10));
        assert!(!q.converged);
    }
}
