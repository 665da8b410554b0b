//! Fourier-symbol evaluator: multiply the discrete transform by `|ξ|^α`.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{FracError, Result};
use crate::field::ScalarField;
use crate::grid::GridField;
use crate::operator::constants::KernelConstants;
use crate::params::{sphere_area, FracParams};
use crate::quad::{integrate_nested, QuadOpts};
use crate::sphere::sphere_integral;

/// In-place N-d transform of a row-major cube.
fn fft_nd(data: &mut [Complex64], dim: usize, n: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let total = n.pow(dim as u32);
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        for start in 0..total {
            // visit each line once, from the element whose axis index is 0
            if !(start / stride).is_multiple_of(n) {
                continue;
            }
            for j in 0..n {
                line[j] = data[start + j * stride];
            }
            fft.process(&mut line);
            for j in 0..n {
                data[start + j * stride] = line[j];
            }
        }
    }
}

fn frequency(j: usize, n: usize, half_width: f64) -> f64 {
    let m = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
    std::f64::consts::PI * m / half_width
}

/// Transform of `g` with the symbol applied and the `1/N^n` normalization
/// folded in.
fn symbol_spectrum(g: &GridField, alpha: f64) -> Vec<Complex64> {
    let (dim, n) = (g.dim, g.points_per_axis);
    let mut data: Vec<Complex64> = g.samples.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    fft_nd(&mut data, dim, n, false);
    let scale = 1.0 / data.len() as f64;
    let freqs: Vec<f64> = (0..n).map(|j| frequency(j, n, g.half_width)).collect();
    for (i, c) in data.iter_mut().enumerate() {
        let idx = g.index(i);
        let xi2: f64 = (0..dim).map(|d| freqs[idx[d]] * freqs[idx[d]]).sum();
        // |0|^α = 0: constants are annihilated
        let sym = if xi2 == 0.0 { 0.0 } else { xi2.powf(0.5 * alpha) };
        *c *= sym * scale;
    }
    data
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(FracError::AlphaOutOfRange(alpha));
    }
    Ok(())
}

/// `(-Δ)^{α/2}` of grid samples through the symbol `|ξ|^α`, refusing input
/// that has not decayed below 1e-10 in the outer 10% shell of the box.
pub fn fraclap_spectral(g: &GridField, alpha: f64) -> Result<GridField> {
    check_alpha(alpha)?;
    let shell = g.shell_max(0.1);
    if !(shell < 1e-10) {
        return Err(FracError::PeriodizationGuard(shell));
    }
    fraclap_spectral_periodic(g, alpha)
}

/// Same transform without the guard: the samples are taken to be one period
/// of a periodic function, for which the result is exact.
pub fn fraclap_spectral_periodic(g: &GridField, alpha: f64) -> Result<GridField> {
    check_alpha(alpha)?;
    GridField::new(g.dim, g.half_width, g.points_per_axis, g.center.clone(), g.samples.clone())?;
    let mut data = symbol_spectrum(g, alpha);
    fft_nd(&mut data, g.dim, g.points_per_axis, true);
    let samples = data.iter().map(|c| c.re).collect();
    GridField::new(g.dim, g.half_width, g.points_per_axis, g.center.clone(), samples)
}

/// Trigonometric interpolation of a normalized spectrum at `x`. The Nyquist
/// mode uses a cosine so the interpolant is real.
fn interpolate(spec: &[Complex64], g: &GridField, x: &[f64]) -> f64 {
    let (dim, n) = (g.dim, g.points_per_axis);
    let tables: Vec<Vec<Complex64>> = (0..dim)
        .map(|d| {
            let dx = x[d] - (g.center[d] - g.half_width);
            (0..n)
                .map(|j| {
                    let phase = frequency(j, n, g.half_width) * dx;
                    if j == n / 2 {
                        Complex64::new(phase.cos(), 0.0)
                    } else {
                        Complex64::from_polar(1.0, phase)
                    }
                })
                .collect()
        })
        .collect();
    let mut acc = Complex64::new(0.0, 0.0);
    match dim {
        2 => {
            for j0 in 0..n {
                let row = &spec[j0 * n..(j0 + 1) * n];
                let s: Complex64 = row.iter().zip(&tables[1]).map(|(a, b)| a * b).sum();
                acc += tables[0][j0] * s;
            }
        }
        _ => {
            for j0 in 0..n {
                let mut s0 = Complex64::new(0.0, 0.0);
                for j1 in 0..n {
                    let base = (j0 * n + j1) * n;
                    let row = &spec[base..base + n];
                    let s: Complex64 = row.iter().zip(&tables[2]).map(|(a, b)| a * b).sum();
                    s0 += tables[1][j1] * s;
                }
                acc += tables[0][j0] * s0;
            }
        }
    }
    acc.re
}

/// Grid used by the point evaluator.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralConfig {
    pub points_per_axis: usize,
    pub half_width: f64,
    pub center: Option<Vec<f64>>,
}

impl SpectralConfig {
    pub fn new(points_per_axis: usize, half_width: f64) -> Self {
        Self { points_per_axis, half_width, center: None }
    }

    /// 512² on `[-12, 12]²` in the plane, 128³ on `[-12, 12]³` in space.
    pub fn for_dim(n: usize) -> Self {
        Self::new(if n == 2 { 512 } else { 128 }, 12.0)
    }

    pub fn centered(mut self, center: &[f64]) -> Self {
        self.center = Some(center.to_vec());
        self
    }
}

/// Smooth step: 1 for `r <= r1`, 0 for `r >= r2`.
fn window(r: f64, r1: f64, r2: f64) -> f64 {
    if r <= r1 {
        return 1.0;
    }
    if r >= r2 {
        return 0.0;
    }
    let t = (r2 - r) / (r2 - r1);
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// `(-Δ)^{α/2} f` at `points` from a spectral solve on the configured grid.
///
/// The periodic images of the result are removed through their multipole
/// far field. Fields too slowly decaying for the box are split by a smooth
/// window into a compact near part, handled spectrally, and a far part whose
/// contribution at the (distant) points is a regular integral.
pub fn fraclap_spectral_points(
    f: &ScalarField,
    points: &[Vec<f64>],
    params: &FracParams,
    cfg: &SpectralConfig,
    k: &KernelConstants,
) -> Result<Vec<f64>> {
    k.require(params)?;
    spectral_points_unchecked(f, points, params, cfg, k.c_pv)
}

pub(crate) fn spectral_points_unchecked(
    f: &ScalarField,
    points: &[Vec<f64>],
    params: &FracParams,
    cfg: &SpectralConfig,
    c: f64,
) -> Result<Vec<f64>> {
    let n = params.n;
    let alpha = params.alpha;
    let l = cfg.half_width;
    let center = cfg.center.clone().unwrap_or_else(|| vec![0.0; n]);
    params.check_point(&center)?;
    let mut reach: f64 = 0.0;
    for p in points {
        params.check_point(p)?;
        let sup = p.iter().zip(&center).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if sup > 0.5 * l {
            return Err(FracError::Precondition(format!("point {p:?} is within 25% of the box boundary")));
        }
        reach = reach.max(crate::params::dist(p, &center));
    }

    let raw = GridField::sample_centered(f, l, cfg.points_per_axis, &center)?;
    let shell = raw.shell_max(0.1);
    let windowed = !(shell < 1e-10);
    let (r1, r2) = (reach + 1.5, reach + 5.5);
    let near = if windowed {
        if f.tail_exponent().is_none() || r2 > 0.9 * l {
            return Err(FracError::PeriodizationGuard(shell));
        }
        let samples = (0..raw.len())
            .map(|i| {
                let y = raw.coordinate(i);
                let r = crate::params::dist(&y[..n], &center);
                raw.samples[i] * window(r, r1, r2)
            })
            .collect();
        GridField::new(n, l, cfg.points_per_axis, center.clone(), samples)?
    } else {
        raw
    };

    let spec = symbol_spectrum(&near, alpha);
    let (mono, dip, quad) = moments(&near);
    let s = params.nf() + alpha;
    let w = near.spacing().powi(n as i32);
    let sources: Vec<([f64; 3], f64)> = (0..near.len())
        .filter(|&i| near.samples[i] != 0.0)
        .map(|i| {
            let y = near.coordinate(i);
            let mut z = [0.0; 3];
            for a in 0..n {
                z[a] = y[a] - center[a];
            }
            (z, near.samples[i] * w)
        })
        .collect();

    let mut out = Vec::with_capacity(points.len());
    for p in points {
        let mut v = interpolate(&spec, &near, p);
        let rel: Vec<f64> = p.iter().zip(&center).map(|(a, b)| a - b).collect();
        v -= image_sum(&rel, l, s, n, alpha, mono, &dip, &quad, c);
        v -= nearest_images(&rel, l, s, n, &sources, c);
        if windowed {
            v += far_part(f, p, &center, r1, r2, params, c);
        }
        out.push(v);
    }
    Ok(out)
}

/// Zeroth, first and second moments of the samples about the grid center.
fn moments(g: &GridField) -> (f64, [f64; 3], [[f64; 3]; 3]) {
    let w = g.spacing().powi(g.dim as i32);
    let mut m = 0.0;
    let mut d = [0.0; 3];
    let mut q = [[0.0; 3]; 3];
    for (i, v) in g.samples.iter().enumerate() {
        if *v == 0.0 {
            continue;
        }
        let y = g.coordinate(i);
        let mut z = [0.0; 3];
        for a in 0..g.dim {
            z[a] = y[a] - g.center[a];
        }
        m += v * w;
        for a in 0..g.dim {
            d[a] += v * w * z[a];
            for b in 0..g.dim {
                q[a][b] += v * w * z[a] * z[b];
            }
        }
    }
    (m, d, q)
}

/// The images with `|m|_∞ = 1` are too close for a truncated multipole
/// expansion; their far field is summed over the samples directly.
fn nearest_images(rel: &[f64], l: f64, s: f64, n: usize, sources: &[([f64; 3], f64)], c: f64) -> f64 {
    let mut total = 0.0;
    let kz = if n == 3 { 1 } else { 0 };
    for i in -1i32..=1 {
        for j in -1i32..=1 {
            for k in -kz..=kz {
                if i == 0 && j == 0 && k == 0 {
                    continue;
                }
                let mm = [i as f64, j as f64, k as f64];
                let mut y = [0.0; 3];
                for a in 0..n {
                    y[a] = rel[a] + 2.0 * l * mm[a];
                }
                total += sources
                    .iter()
                    .map(|(z, m)| {
                        let d2: f64 = (0..n).map(|a| (y[a] - z[a]) * (y[a] - z[a])).sum();
                        m * d2.powf(-0.5 * s)
                    })
                    .sum::<f64>();
            }
        }
    }
    -c * total
}

/// Sum over lattice shifts `2Lm` with `|m|_∞ >= 2` of the far field
/// `-c [M K - D·∇K + ½ Q:∇∇K](y)` with `K = |y|^{-s}`.
#[allow(clippy::too_many_arguments)]
fn image_sum(
    rel: &[f64],
    l: f64,
    s: f64,
    n: usize,
    alpha: f64,
    mono: f64,
    dip: &[f64; 3],
    quad: &[[f64; 3]; 3],
    c: f64,
) -> f64 {
    let m_max: i64 = if n == 2 { 40 } else { 12 };
    let r2max = (m_max * m_max) as f64;
    let mut total = 0.0;
    let mut count = 0usize;
    let mz = if n == 3 { m_max } else { 0 };
    for i in -m_max..=m_max {
        for j in -m_max..=m_max {
            for k in -mz..=mz {
                let mm = [i as f64, j as f64, k as f64];
                if mm[0] * mm[0] + mm[1] * mm[1] + mm[2] * mm[2] > r2max {
                    continue;
                }
                count += 1;
                if i.abs() <= 1 && j.abs() <= 1 && k.abs() <= 1 {
                    continue;
                }
                let mut y = [0.0; 3];
                for a in 0..n {
                    y[a] = rel[a] + 2.0 * l * mm[a];
                }
                let r2: f64 = y.iter().map(|v| v * v).sum();
                let kk = r2.powf(-0.5 * s);
                let mut term = mono * kk;
                // ∇K = -s K y / r²
                for a in 0..n {
                    term += dip[a] * s * kk * y[a] / r2;
                }
                // ∂_ab K = K (s(s+2) y_a y_b / r⁴ - s δ_ab / r²)
                let mut h = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        let mut v = s * (s + 2.0) * y[a] * y[b] / (r2 * r2);
                        if a == b {
                            v -= s / r2;
                        }
                        h += quad[a][b] * v;
                    }
                }
                term += 0.5 * kk * h;
                total += term;
            }
        }
    }
    // monopole beyond the summed ball, as a continuum integral
    let ball = if n == 2 { std::f64::consts::PI } else { 4.0 * std::f64::consts::PI / 3.0 };
    let r_eff = (count as f64 / ball).powf(1.0 / n as f64);
    let cell = (2.0 * l).powi(n as i32);
    total += mono * sphere_area(n) * (2.0 * l * r_eff).powf(-alpha) / (alpha * cell);
    -c * total
}

/// `-c ∫ f(z) (1 - w(|z - center|)) |p - z|^{-n-α} dz`.
fn far_part(f: &ScalarField, p: &[f64], center: &[f64], r1: f64, r2: f64, params: &FracParams, c: f64) -> f64 {
    let n = params.n;
    let s = params.nf() + params.alpha;
    let beta = f.tail_exponent().unwrap_or(0.0).min(50.0);
    let opts = QuadOpts::new(1e-15, 1e-11).with_max_panels(200);
    let shell = |r: f64| -> (f64, f64) {
        let q = sphere_integral(
            n,
            |w| {
                let mut z = [0.0; 3];
                let mut d2 = 0.0;
                for a in 0..n {
                    z[a] = center[a] + r * w[a];
                    d2 += (p[a] - z[a]) * (p[a] - z[a]);
                }
                (f.eval(&z[..n]) * d2.powf(-0.5 * s), 0.0)
            },
            &opts,
        );
        let wgt = r.powi(n as i32 - 1) * (1.0 - window(r, r1, r2));
        (wgt * q.value, wgt * q.error)
    };
    let transition = integrate_nested(shell, &crate::quad::uniform_breaks(r1, r2, 4), &opts);
    let r_max = r2 * 1e4;
    let outer = integrate_nested(
        |t| {
            let r = t.exp();
            let (v, e) = shell(r);
            (v * r, e * r)
        },
        &crate::quad::uniform_breaks(r2.ln(), r_max.ln(), 12),
        &opts,
    );
    let tail = shell(r_max).0 * r_max / (params.alpha + beta);
    -c * (transition.value + outer.value + tail)
}
