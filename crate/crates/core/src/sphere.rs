//! Integration over spherical caps of `S^{n-1}` for n = 2, 3.
//!
//! A cap is the set of unit vectors within angle `theta_max` of a frame's
//! axis; `theta_max = π` is the whole sphere and `π/2` a hemisphere.

use crate::quad::{graded_panels, integrate_graded as integrate_panels, integrate_nested, Quad, QuadOpts};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy)]
pub struct Frame {
    n: usize,
    e: [[f64; 3]; 3],
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let s = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / s, v[1] / s, v[2] / s]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

impl Frame {
    pub fn standard(n: usize) -> Self {
        Self { n, e: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] }
    }

    /// Frame whose first vector is `axis` (need not be normalized).
    pub fn with_axis(n: usize, axis: &[f64]) -> Self {
        let mut a = [0.0; 3];
        a[..n].copy_from_slice(&axis[..n]);
        let e0 = normalize(a);
        if n == 2 {
            return Self { n, e: [e0, [-e0[1], e0[0], 0.0], [0.0, 0.0, 1.0]] };
        }
        // pick the coordinate axis least aligned with e0
        let k = (0..3)
            .min_by(|&i, &j| e0[i].abs().total_cmp(&e0[j].abs()))
            .unwrap_or(0);
        let mut t = [0.0; 3];
        t[k] = 1.0;
        let e1 = normalize(cross(e0, t));
        let e2 = cross(e0, e1);
        Self { n, e: [e0, e1, e2] }
    }

    pub fn axis(&self) -> [f64; 3] {
        self.e[0]
    }

    fn dir2(&self, theta: f64) -> [f64; 3] {
        let (s, c) = theta.sin_cos();
        [c * self.e[0][0] + s * self.e[1][0], c * self.e[0][1] + s * self.e[1][1], 0.0]
    }

    fn dir3(&self, theta: f64, phi: f64) -> [f64; 3] {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        let mut out = [0.0; 3];
        for (d, o) in out.iter_mut().enumerate() {
            *o = ct * self.e[0][d] + st * (cp * self.e[1][d] + sp * self.e[2][d]);
        }
        out
    }
}

/// Integrates `g(ω)` over the cap of half-angle `theta_max` about the frame
/// axis, with respect to surface measure. For n = 2 the unused third
/// component of `ω` is zero.
pub fn cap_integral<G>(frame: &Frame, theta_max: f64, g: G, opts: &QuadOpts) -> Quad
where
    G: FnMut(&[f64; 3]) -> (f64, f64),
{
    cap_integral_with_breaks(frame, theta_max, &[], g, opts)
}

// Polar panels on [0, theta_max]: uniform, split at the `extra` angles.
// A panel end flagged `true` sits on an extra angle.
fn polar_panels(theta_max: f64, extra: &[f64]) -> Vec<(f64, f64, bool, bool)> {
    let panels = ((4.0 * theta_max / PI).ceil() as usize).max(2);
    let mut b: Vec<(f64, bool)> = (0..=panels).map(|i| (theta_max * i as f64 / panels as f64, false)).collect();
    b.extend(extra.iter().filter(|t| **t > 1e-9 && **t < theta_max - 1e-9).map(|t| (*t, true)));
    graded_panels(b)
}

/// [`cap_integral`] with extra breaks at polar angles (from the axis) where
/// the integrand is known to be non-smooth.
pub fn cap_integral_with_breaks<G>(frame: &Frame, theta_max: f64, extra: &[f64], mut g: G, opts: &QuadOpts) -> Quad
where
    G: FnMut(&[f64; 3]) -> (f64, f64),
{
    let theta_max = theta_max.clamp(0.0, PI);
    if theta_max == 0.0 {
        return Quad { value: 0.0, error: 0.0, evals: 0, converged: true };
    }
    match frame.n {
        2 => {
            let half = polar_panels(theta_max, extra);
            let panels: Vec<_> =
                half.iter().rev().map(|&(a, b, sa, sb)| (-b, -a, sb, sa)).chain(half.iter().copied()).collect();
            integrate_panels(&panels, |t| g(&frame.dir2(t)), opts)
        }
        _ => {
            let panels = polar_panels(theta_max, extra);
            let inner_opts = QuadOpts {
                abs_tol: opts.abs_tol / (2.0 * PI),
                rel_tol: opts.rel_tol * 0.3,
                max_panels: opts.max_panels,
            };
            let phi_breaks = [0.0, 0.5 * PI, PI, 1.5 * PI, 2.0 * PI];
            let mut evals = 0;
            let mut q = integrate_panels(
                &panels,
                |t| {
                    let st = t.sin();
                    if st == 0.0 {
                        return (0.0, 0.0);
                    }
                    let inner = integrate_nested(|p| g(&frame.dir3(t, p)), &phi_breaks, &inner_opts);
                    evals += inner.evals;
                    (st * inner.value, st * inner.error)
                },
                opts,
            );
            q.evals += evals;
            q
        }
    }
}

/// Cap integral of a function invariant under rotations about the frame
/// axis; in 3D this reduces to `2π ∫ sin θ g(θ) dθ`.
pub fn cap_integral_axial<G>(frame: &Frame, theta_max: f64, g: G, opts: &QuadOpts) -> Quad
where
    G: FnMut(&[f64; 3]) -> (f64, f64),
{
    cap_integral_axial_with_breaks(frame, theta_max, &[], g, opts)
}

pub fn cap_integral_axial_with_breaks<G>(frame: &Frame, theta_max: f64, extra: &[f64], mut g: G, opts: &QuadOpts) -> Quad
where
    G: FnMut(&[f64; 3]) -> (f64, f64),
{
    if frame.n == 2 {
        return cap_integral_with_breaks(frame, theta_max, extra, g, opts);
    }
    let theta_max = theta_max.clamp(0.0, PI);
    if theta_max == 0.0 {
        return Quad { value: 0.0, error: 0.0, evals: 0, converged: true };
    }
    let panels = polar_panels(theta_max, extra);
    integrate_panels(
        &panels,
        |t| {
            let (v, e) = g(&frame.dir3(t, 0.0));
            let w = 2.0 * PI * t.sin();
            (w * v, w * e)
        },
        opts,
    )
}

/// Whole-sphere integral.
pub fn sphere_integral<G>(n: usize, g: G, opts: &QuadOpts) -> Quad
where
    G: FnMut(&[f64; 3]) -> (f64, f64),
{
    cap_integral(&Frame::standard(n), PI, g, opts)
}

/// Integral over a hemisphere about the first coordinate axis; pairing
/// `g(ω) + g(-ω)` inside the integrand gives the whole-sphere integral with
/// the odd part cancelled exactly.
pub fn hemisphere_integral<G>(n: usize, g: G, opts: &QuadOpts) -> Quad
where
    G: FnMut(&[f64; 3]) -> (f64, f64),
{
    cap_integral(&Frame::standard(n), 0.5 * PI, g, opts)
}

/// Solid angle of a cap (used in tests and tail models).
pub fn cap_area(n: usize, theta_max: f64) -> f64 {
    match n {
        2 => 2.0 * theta_max,
        _ => 2.0 * PI * (1.0 - theta_max.cos()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::sphere_area;

    #[test]
    fn full_sphere_area() {
        for n in 2..=3 {
            let q = sphere_integral(n, |_| (1.0, 0.0), &QuadOpts::default());
            assert!((q.value - sphere_area(n)).abs() < 1e-11);
        }
    }

    #[test]
    fn cap_area_matches_closed_form() {
        let f = Frame::with_axis(3, &[1.0, 2.0, -0.5]);
        let q = cap_integral(&f, 0.4, |_| (1.0, 0.0), &QuadOpts::default());
        assert!((q.value - cap_area(3, 0.4)).abs() < 1e-12);
    }

    #[test]
    fn second_moment_is_isotropic() {
        // ∫ ω_i² dσ = |S|/n for every axis, in any frame.
        let f = Frame::with_axis(3, &[0.3, -1.0, 0.7]);
        for i in 0..3 {
            let q = cap_integral(&f, PI, |w| (w[i] * w[i], 0.0), &QuadOpts::default());
            assert!((q.value - 4.0 * PI / 3.0).abs() < 1e-11);
        }
    }

    #[test]
    fn axial_cap_matches_full_cap() {
        let f = Frame::with_axis(3, &[0.2, 1.0, -0.4]);
        let a = f.axis();
        let g = |w: &[f64; 3]| {
            let c = w[0] * a[0] + w[1] * a[1] + w[2] * a[2];
            ((3.0 * c).cos() + c * c, 0.0)
        };
        let full = cap_integral(&f, 2.0, g, &QuadOpts::default());
        let axial = cap_integral_axial(&f, 2.0, g, &QuadOpts::default());
        assert!((full.value - axial.value).abs() < 1e-11);
    }

    #[test]
    fn frames_are_orthonormal() {
        let f = Frame::with_axis(3, &[0.0, 0.0, 2.0]);
        for i in 0..3 {
            for j in 0..3 {
                let d: f64 = (0..3).map(|k| f.e[i][k] * f.e[j][k]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-14);
            }
        }
    }
}
