//! Explicit kernels: Riesz potential, exterior Poisson kernel and
//! extension, Green's function of the ball.

pub mod green;
pub mod poisson;
pub mod riesz;

pub use green::{green_function, green_solve_ball, green_symmetry_check, BallGreenOperator};
pub use poisson::{poisson_extend, poisson_kernel, verify_alpha_harmonic_outside, PoissonExtension};
pub use riesz::{riesz_field, riesz_potential, riesz_radial_field};

use std::f64::consts::PI;

use crate::quad::{integrate_nested, Quad, QuadOpts};
use crate::sphere::{cap_integral, cap_integral_axial, Frame};

/// `∫_{B(center, radius)} h(y) |x-y|^{α-n} dy` in polar coordinates about
/// `x`. Inside the ball the weak singularity is absorbed by `u = ρ^α`;
/// outside, only the cone of rays that hit the ball is integrated.
///
/// `axial` declares `h` invariant under rotations about the line through
/// the origin and `x` (with `center` on that line), which lets 3D reduce
/// the angular integral to one dimension.
#[allow(clippy::too_many_arguments)]
pub(crate) fn ball_integral<H>(
    n: usize,
    alpha: f64,
    x: &[f64],
    center: &[f64],
    radius: f64,
    h: H,
    opts: &QuadOpts,
    axial: bool,
) -> Quad
where
    H: Fn(&[f64]) -> f64,
{
    let mut rel = [0.0; 3];
    for d in 0..n {
        rel[d] = x[d] - center[d];
    }
    let d2: f64 = rel.iter().map(|v| v * v).sum();
    let d = d2.sqrt();
    let inner = QuadOpts::new(opts.abs_tol / (4.0 * PI), 0.3 * opts.rel_tol).with_max_panels(opts.max_panels);
    let point = |rho: f64, w: &[f64; 3]| {
        let mut p = [0.0; 3];
        for a in 0..n {
            p[a] = x[a] + rho * w[a];
        }
        p
    };
    if d < radius {
        let ray = |w: &[f64; 3]| {
            let b: f64 = (0..n).map(|a| rel[a] * w[a]).sum();
            let rho_max = -b + (b * b - d2 + radius * radius).max(0.0).sqrt();
            let rho_s = rho_max.min(1.0);
            // u = ρ^α on [0, ρ_s]
            let q0 = integrate_nested(
                |u| {
                    let rho = u.powf(1.0 / alpha);
                    let p = point(rho, w);
                    (h(&p[..n]) / alpha, 0.0)
                },
                &[0.0, 0.5 * rho_s.powf(alpha), rho_s.powf(alpha)],
                &inner,
            );
            let mut value = q0.value;
            let mut error = q0.error;
            if rho_max > rho_s {
                let mut breaks = vec![rho_s];
                while *breaks.last().unwrap() * 2.0 < rho_max {
                    let next = breaks.last().unwrap() * 2.0;
                    breaks.push(next);
                }
                breaks.push(rho_max);
                let q1 = integrate_nested(
                    |rho| {
                        let p = point(rho, w);
                        (h(&p[..n]) * rho.powf(alpha - 1.0), 0.0)
                    },
                    &breaks,
                    &inner,
                );
                value += q1.value;
                error += q1.error;
            }
            (value, error)
        };
        if axial && n == 3 {
            let xr: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let frame = if xr > 0.0 { Frame::with_axis(n, x) } else { Frame::standard(n) };
            return cap_integral_axial(&frame, PI, ray, opts);
        }
        cap_integral(&Frame::standard(n), PI, ray, opts)
    } else {
        let axis: Vec<f64> = rel[..n].iter().map(|v| -v).collect();
        let theta_max = if d > radius { (radius / d).asin() } else { 0.5 * PI };
        let ray = |w: &[f64; 3]| {
            let b: f64 = (0..n).map(|a| rel[a] * w[a]).sum();
            let disc = b * b - d2 + radius * radius;
            if disc <= 0.0 {
                return (0.0, 0.0);
            }
            let s = disc.sqrt();
            let (lo, hi) = ((-b - s).max(0.0), -b + s);
            if hi <= lo {
                return (0.0, 0.0);
            }
            let q = integrate_nested(
                |rho| {
                    let p = point(rho, w);
                    (h(&p[..n]) * rho.powf(alpha - 1.0), 0.0)
                },
                &[lo, 0.5 * (lo + hi), hi],
                &inner,
            );
            (q.value, q.error)
        };
        if axial {
            return cap_integral_axial(&Frame::with_axis(n, &axis), theta_max, ray, opts);
        }
        cap_integral(&Frame::with_axis(n, &axis), theta_max, ray, opts)
    }
}

/// `S(r, ρ) = ∫_{S^{n-1}} |r e - ρ ω|^{α-n} dω`, the sphere mean of the
/// Riesz kernel. Closed form in 3D; a θ quadrature in 2D.
pub(crate) fn sphere_kernel(n: usize, alpha: f64, r: f64, rho: f64) -> f64 {
    let e = alpha - n as f64;
    let big = r.max(rho);
    if r == 0.0 || rho == 0.0 {
        return crate::params::sphere_area(n) * big.powf(e);
    }
    if n == 3 {
        let (s, d) = (r + rho, (r - rho).abs());
        if (alpha - 1.0).abs() < 1e-9 {
            return 2.0 * PI / (r * rho) * (s / d).ln();
        }
        return 2.0 * PI / (r * rho * (alpha - 1.0)) * (s.powf(alpha - 1.0) - d.powf(alpha - 1.0));
    }
    let q = crate::quad::integrate_breaks(
        |t| (r * r + rho * rho - 2.0 * r * rho * t.cos()).max(0.0).powf(0.5 * e),
        &[0.0, 0.05 * PI, 0.25 * PI, PI],
        &QuadOpts::new(1e-14 * big.powf(e), 1e-11).with_max_panels(200),
    );
    2.0 * q.value
}
