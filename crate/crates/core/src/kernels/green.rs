//! Green's function of the ball `B_R` for `(-Δ)^{α/2}` with zero exterior
//! data, in the standard closed form
//! `G_R(x,y) = κ |x-y|^{α-n} ∫_0^{r0} b^{α/2-1} (1+b)^{-n/2} db`,
//! `r0 = (R²-|x|²)(R²-|y|²) / (R² |x-y|²)`.

use std::f64::consts::PI;
use std::sync::Arc;

use statrs::function::beta::{beta, beta_reg};
use statrs::function::gamma::gamma;

use crate::error::{FracError, Result};
use crate::field::ScalarField;
use crate::operator::pv::EvalResult;
use crate::params::{dist, norm, FracParams};
use crate::quad::QuadOpts;
use crate::report::Report;
use crate::spline::CubicSpline;

use super::ball_integral;

/// `κ = Γ(n/2) / (2^α π^{n/2} Γ(α/2)²)`.
pub fn green_constant(params: &FracParams) -> f64 {
    let (n, a) = (params.nf(), params.alpha);
    gamma(0.5 * n) / (2f64.powf(a) * PI.powf(0.5 * n) * gamma(0.5 * a).powi(2))
}

/// `G_R(x, y) / (κ |x-y|^{α-n})` given `s = R²|x-y|²` and
/// `t = (R²-|x|²)(R²-|y|²)`; the integral is an incomplete beta function.
fn green_factor(s: f64, t: f64, params: &FracParams) -> f64 {
    let (a, b) = (0.5 * params.alpha, 0.5 * (params.nf() - params.alpha));
    if t <= 0.0 {
        return 0.0;
    }
    beta(a, b) * beta_reg(a, b, t / (t + s))
}

pub fn green_function(x: &[f64], y: &[f64], radius: f64, params: &FracParams) -> Result<f64> {
    params.check_point(x)?;
    params.check_point(y)?;
    let d = dist(x, y);
    if d == 0.0 {
        return Err(FracError::Precondition("Green's function is singular on the diagonal".into()));
    }
    let r2 = radius * radius;
    let (nx, ny) = (norm(x), norm(y));
    if nx >= radius || ny >= radius {
        return Ok(0.0);
    }
    let t = (r2 - nx * nx) * (r2 - ny * ny);
    let s = r2 * d * d;
    Ok(green_constant(params) * d.powf(params.alpha - params.nf()) * green_factor(s, t, params))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallGreenOperator {
    pub radius: f64,
    pub params: FracParams,
    pub opts: QuadOpts,
}

impl BallGreenOperator {
    pub fn new(radius: f64, params: &FracParams) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(FracError::InvalidInput(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Self { radius, params: *params, opts: QuadOpts::new(1e-13, 1e-9).with_max_panels(400) })
    }

    /// `v_R(x) = ∫_{B_R} G_R(x,y) f(y) dy`; zero for `|x| >= R`.
    pub fn solve(&self, f: &ScalarField, x: &[f64]) -> Result<EvalResult> {
        let params = &self.params;
        params.check_point(x)?;
        let n = params.n;
        let big_r = self.radius;
        let xr = norm(x);
        if xr >= big_r {
            return Ok(EvalResult::exact(0.0));
        }
        let domain = f.support_radius.map_or(big_r, |s| s.min(big_r));
        let r2 = big_r * big_r;
        let tx = r2 - xr * xr;
        let kappa = green_constant(params);
        let mut scale = f.eval(x).abs();
        for d in 0..n {
            let mut p = [0.0; 3];
            p[d] = 0.5 * domain;
            scale = scale.max(f.eval(&p[..n]).abs()).max(f.eval(&vec![0.0; n]).abs());
        }
        if scale == 0.0 && f.support_radius.is_some() {
            return Ok(EvalResult::exact(0.0));
        }
        let opts = QuadOpts { abs_tol: self.opts.abs_tol * scale.max(1e-300), ..self.opts };
        let q = ball_integral(
            n,
            params.alpha,
            x,
            &vec![0.0; n],
            domain,
            |y| {
                let fy = f.eval(y);
                if fy == 0.0 {
                    return 0.0;
                }
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                let ny2: f64 = y.iter().map(|v| v * v).sum();
                fy * green_factor(r2 * d2, tx * (r2 - ny2), params)
            },
            &opts,
            f.is_radial,
        );
        if !q.converged && q.error > 1e-6 * q.value.abs().max(scale) {
            return Err(FracError::BudgetExhausted { budget: opts.max_panels, value: kappa * q.value, error: kappa * q.error });
        }
        Ok(EvalResult { value: kappa * q.value, error_estimate: kappa * q.error, flagged: false, evaluations: q.evals })
    }

    /// Solution field for a radial source, tabulated as
    /// `v_R / (R² - r²)^{α/2}` on nodes clustered at the sphere. Vanishes
    /// outside the ball.
    pub fn solution_field(&self, f: &ScalarField) -> Result<ScalarField> {
        if !f.is_radial {
            return Err(FracError::Precondition(format!("`{}` is not radial", f.label)));
        }
        let n = self.params.n;
        let big_r = self.radius;
        let half_a = 0.5 * self.params.alpha;
        let m = 64;
        let rs: Vec<f64> = (0..m).map(|i| big_r * (0.5 * PI * i as f64 / m as f64).sin()).collect();
        let mut ys = Vec::with_capacity(m);
        for &r in &rs {
            let mut x = vec![0.0; n];
            x[0] = r;
            let v = self.solve(f, &x)?.value;
            ys.push(v / (big_r * big_r - r * r).powf(half_a));
        }
        let spline = Arc::new(CubicSpline::even(&rs, &ys)?);
        Ok(ScalarField::radial(n, format!("green_R={big_r}[{}]", f.label), move |r| {
            if r >= big_r {
                0.0
            } else {
                spline.eval(r) * (big_r * big_r - r * r).powf(half_a)
            }
        })
        .with_support(big_r)
        .with_kink(big_r))
    }
}

pub fn green_solve_ball(f: &ScalarField, radius: f64, x: &[f64], params: &FracParams) -> Result<EvalResult> {
    BallGreenOperator::new(radius, params)?.solve(f, x)
}

/// Symmetry `G(x,y) = G(y,x)` to relative 1e-10 at pairs inside the ball.
pub fn green_symmetry_check(radius: f64, params: &FracParams, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<Report> {
    let mut report = Report::new("green_symmetry", params);
    for (x, y) in pairs {
        if norm(x) >= radius || norm(y) >= radius {
            return Err(FracError::Precondition(format!("pair ({x:?}, {y:?}) is not inside the ball")));
        }
        let gxy = green_function(x, y, radius, params)?;
        let gyx = green_function(y, x, radius, params)?;
        let rel = (gxy - gyx).abs() / gxy.abs();
        report.case_le(format!("G({x:?},{y:?})"), "rel", rel, 1e-10);
    }
    Ok(report)
}
