//! Named verification suites, each producing one [`Report`].
//!
//! A numerical error inside a case becomes a failed case carrying the error
//! message; only bad options abort a suite.

use std::time::Instant;

use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

use crate::equivalence::{divergence_check, verify_bubble, verify_pde_to_integral, BubbleOptions};
use crate::error::{FracError, Result};
use crate::field::make_catalog_field;
use crate::fit::{dyadic, fit_decay_with};
use crate::kernels::{
    green_symmetry_check, poisson_extend, riesz_potential, verify_alpha_harmonic_outside, BallGreenOperator,
};
use crate::liouville::{build_phi, check_i1_vanishes, check_i2_bound, trace_pairing, verify_riesz_inversion};
use crate::operator::{
    fraclap_pv, fraclap_spectral_points, selfadjoint::selfadjoint_sides, validate_constants, KernelConstants,
    PvQuadConfig, SpectralConfig,
};
use crate::params::FracParams;
use crate::report::Report;

pub const SUITE_NAMES: [&str; 5] = ["operator", "kernels", "liouville", "equivalence", "all"];

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    pub params: FracParams,
    /// Spectral grid points per axis; 256 in the plane and 128 in space
    /// when unset.
    pub grid: Option<usize>,
    /// Half-width of the spectral box.
    pub half_width: f64,
    /// Relative tolerance of the PV quadrature.
    pub tol: f64,
    /// Seed for sampled test points.
    pub seed: u64,
}

impl SuiteOptions {
    pub fn new(params: FracParams) -> Self {
        Self { params, grid: None, half_width: 12.0, tol: 1e-8, seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(g) = self.grid {
            if !(16..=4096).contains(&g) || g % 2 != 0 {
                return Err(FracError::InvalidInput(format!("grid must be even and in [16, 4096], got {g}")));
            }
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(FracError::InvalidInput(format!("box must be positive, got {}", self.half_width)));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(FracError::InvalidInput(format!("tol must lie in (0,1), got {}", self.tol)));
        }
        Ok(())
    }

    pub fn spectral(&self) -> SpectralConfig {
        let n = self.grid.unwrap_or(if self.params.n == 2 { 256 } else { 128 });
        SpectralConfig::new(n, self.half_width)
    }

    pub fn pv(&self) -> PvQuadConfig {
        PvQuadConfig::default().with_tolerance(self.tol)
    }

    fn rng(&self) -> StdRng {
        StdRng::seed_from_u64(self.seed)
    }
}

/// Runs the named suite (or all of them) and stamps the wall time.
pub fn run_suite(name: &str, opts: &SuiteOptions) -> Result<Report> {
    opts.validate()?;
    let start = Instant::now();
    let mut report = match name {
        "all" => {
            let mut all = Report::new("all", &opts.params);
            for sub in &SUITE_NAMES[..4] {
                let r = run_one(sub, opts);
                all.absorb(sub, r);
            }
            all
        }
        other if SUITE_NAMES.contains(&other) => run_one(other, opts),
        other => return Err(FracError::InvalidInput(format!("unknown suite `{other}`"))),
    };
    report.wall_time_seconds = Some(start.elapsed().as_secs_f64());
    Ok(report)
}

fn run_one(name: &str, opts: &SuiteOptions) -> Report {
    let p = &opts.params;
    let mut report = Report::new(name, p);
    let kc = match validate_constants(p, &opts.pv()) {
        Ok(kc) => {
            report.case("constants validated", "c_pv", kc.c_pv, kc.c_pv, true);
            kc
        }
        Err(e) => {
            fail(&mut report, "constants validated", &e);
            return report;
        }
    };
    match name {
        "operator" => operator(&mut report, opts, &kc),
        "kernels" => kernels(&mut report, opts, &kc),
        "liouville" => liouville(&mut report, opts, &kc),
        _ => equivalence(&mut report, opts, &kc),
    }
    report
}

fn fail(report: &mut Report, name: &str, e: &FracError) {
    report.case(format!("{name} [{e}]"), "error", f64::NAN, 0.0, false);
}

/// Absorbs a sub-report, or records its error as a failed case.
fn attempt(report: &mut Report, name: &str, r: Result<Report>) {
    match r {
        Ok(sub) => report.absorb(name, sub),
        Err(e) => fail(report, name, &e),
    }
}

fn axis(n: usize, r: f64) -> Vec<f64> {
    let mut x = vec![0.0; n];
    x[0] = r;
    x
}

/// Nine fixed points inside the spectral box, away from its edge.
fn interior_points(n: usize) -> Vec<Vec<f64>> {
    let base: [[f64; 3]; 9] = [
        [0.0, 0.0, 0.0],
        [0.5, 0.0, 0.25],
        [0.0, -0.5, 0.0],
        [1.0, 1.0, -0.5],
        [-1.5, 0.5, 0.0],
        [2.0, -1.0, 1.0],
        [0.25, 2.5, 0.0],
        [-3.0, 0.0, 0.5],
        [1.2, -2.2, -1.0],
    ];
    base.iter().map(|b| b[..n].to_vec()).collect()
}

fn operator(report: &mut Report, o: &SuiteOptions, kc: &KernelConstants) {
    let p = &o.params;
    let n = p.n;
    let pv = o.pv();
    attempt(report, "annihilation", (|| {
        let c = make_catalog_field("constant", p, &[1.0])?;
        let mut rng = o.rng();
        let mut r = Report::new("annihilation", p);
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-4.0..4.0)).collect();
            worst = worst.max(fraclap_pv(&c, &x, p, &pv, kc)?.value.abs());
        }
        r.case_le("fraclap(1) = 0 at 10 points", "max abs", worst, 1e-8);
        Ok(r)
    })());
    let pts = interior_points(n);
    for (name, args) in [("gaussian", vec![]), ("bubble", vec![1.0])] {
        attempt(report, "cross-evaluator", (|| {
            let f = make_catalog_field(name, p, &args)?;
            let spec = fraclap_spectral_points(&f, &pts, p, &o.spectral(), kc)?;
            let mut r = Report::new("cross", p);
            let mut worst: f64 = 0.0;
            for (x, s) in pts.iter().zip(&spec) {
                let a = fraclap_pv(&f, x, p, &pv, kc)?.value;
                worst = worst.max((a - s).abs() / s.abs());
            }
            r.case_le(format!("PV vs spectral ({name}, 9 points)"), "max relative", worst, 1e-3);
            Ok(r)
        })());
    }
    attempt(report, "self-adjoint", (|| {
        let u = make_catalog_field("gaussian", p, &[])?;
        let phi = make_catalog_field("gaussian", p, &[0.7])?;
        let points = if n == 2 { 32 } else { 24 };
        let s = selfadjoint_sides(&u, &phi, p, &pv, kc, 5.0, points)?;
        let mut r = Report::new("selfadjoint", p);
        r.case_le("gaussian pair", "residual", s.residual(), 1e-3);
        Ok(r)
    })());
}

fn kernels(report: &mut Report, o: &SuiteOptions, kc: &KernelConstants) {
    let p = &o.params;
    let n = p.n;
    let pv = o.pv();
    let (nf, alpha) = (p.nf(), p.alpha);
    let dir = axis(n, 1.0);
    attempt(report, "poisson", (|| {
        let one = make_catalog_field("constant", p, &[1.0])?;
        let ext = poisson_extend(&one, 1.0, p)?;
        let mut r = Report::new("poisson", p);
        let samples: Vec<f64> = [1.001, 1.1, 2.0, 8.0, 64.0, 512.0].iter().map(|s| ext.eval(&axis(n, *s))).collect();
        let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        r.case("0 < u_k <= 1", "min", lo, 0.0, lo > 0.0 && hi <= 1.0);
        let pts: Vec<Vec<f64>> = [2.0, 4.0, 8.0].iter().map(|s| axis(n, *s)).collect();
        r.absorb("harmonic", verify_alpha_harmonic_outside(&ext, &pts, &pv, kc)?);
        let beta = fit_decay_with(|x| ext.eval(x), n, None, &dyadic(16.0, 128.0), &dir)?;
        r.exponent("u_k decay", beta, nf - alpha);
        r.case_le("u_k decay exponent", "relative error", (beta / (nf - alpha) - 1.0).abs(), 0.02);
        Ok(r)
    })());
    attempt(report, "riesz", (|| {
        let mut r = Report::new("riesz", p);
        let bump = make_catalog_field("bump", p, &[])?;
        let beta = fit_decay_with(
            |x| riesz_potential(&bump, x, p, kc).map(|e| e.value).unwrap_or(f64::NAN),
            n,
            bump.support_radius,
            &dyadic(16.0, 128.0),
            &dir,
        )?;
        r.exponent("bump potential decay", beta, nf - alpha);
        r.case_le("bump potential decay exponent", "relative error", (beta / (nf - alpha) - 1.0).abs(), 0.02);
        let dipole = make_catalog_field("dipole", p, &[])?;
        let beta = fit_decay_with(
            |x| riesz_potential(&dipole, x, p, kc).map(|e| e.value).unwrap_or(f64::NAN),
            n,
            dipole.support_radius,
            &dyadic(16.0, 128.0),
            &dir,
        )?;
        r.exponent("dipole potential decay", beta, nf - alpha + 1.0);
        r.case_le("dipole potential decay exponent", "relative error", (beta / (nf - alpha + 1.0) - 1.0).abs(), 0.05);
        Ok(r)
    })());
    attempt(report, "green", (|| {
        let mut rng = o.rng();
        let mut point = || -> Vec<f64> {
            loop {
                let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                if crate::params::norm(&x) < 0.95 {
                    return x;
                }
            }
        };
        let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..10).map(|_| (point(), point())).collect();
        let mut r = Report::new("green", p);
        r.absorb("symmetry", green_symmetry_check(1.0, p, &pairs)?);
        let bump = make_catalog_field("bump", p, &[])?;
        let op = BallGreenOperator::new(4.0, p)?;
        let v = op.solution_field(&bump)?;
        for s in [0.0, 0.3, 0.6] {
            let x = axis(n, s);
            let got = fraclap_pv(&v, &x, p, &pv.with_tolerance(1e-6), kc)?.value;
            let want = bump.eval(&x);
            r.case_le(format!("round trip at {x:?}"), "relative", (got - want).abs() / want.abs(), 0.03);
        }
        Ok(r)
    })());
}

fn liouville(report: &mut Report, o: &SuiteOptions, kc: &KernelConstants) {
    let p = &o.params;
    let n = p.n;
    let pv = o.pv();
    let psi = match make_catalog_field("dipole", p, &[]) {
        Ok(f) => f,
        Err(e) => return fail(report, "psi", &e),
    };
    let phi = match build_phi(&psi, p, kc) {
        Ok(f) => f,
        Err(e) => return fail(report, "build phi", &e),
    };
    let want = p.nf() - p.alpha + 1.0;
    match fit_decay_with(|x| phi.eval(x), n, None, &dyadic(16.0, 128.0), &axis(n, 1.0)) {
        Ok(beta) => {
            report.exponent("phi decay", beta, want);
            report.case_le("phi decay exponent", "relative error", (beta / want - 1.0).abs(), 0.05);
        }
        Err(e) => fail(report, "phi decay", &e),
    }
    let radii = [8.0, 16.0, 32.0];
    let points = if n == 2 { 256 } else { 64 };
    let one = match make_catalog_field("constant", p, &[1.0]) {
        Ok(f) => f,
        Err(e) => return fail(report, "u", &e),
    };
    let mut trace = None;
    for c in [1.0, 5.0] {
        let u = one.scaled(c);
        match trace_pairing(&u, &psi, &radii, 4.0, points, p) {
            Ok(t) => {
                let worst = t.pairing_values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                report.case_le(format!("pairing vanishes (u = {c})"), "max abs", worst, 1e-10);
                trace.get_or_insert(t);
            }
            Err(e) => fail(report, "pairing", &e),
        }
    }
    let mut trace = match trace {
        Some(t) => t,
        None => return,
    };
    match check_i1_vanishes(&one, &phi, &dyadic(8.0, 1024.0), 2.0, p, kc) {
        Ok(out) => {
            report.absorb("I1", out.report);
            trace.i1_values = out.rows;
        }
        Err(e) => fail(report, "I1", &e),
    }
    match check_i2_bound(&one, 16.0, &[2.0, 4.0, 8.0], &phi, p, &pv, kc) {
        Ok(out) => {
            report.absorb("I2", out.report);
            trace.i2_bounds = out.rows;
        }
        Err(e) => fail(report, "I2", &e),
    }
    let pts: Vec<Vec<f64>> = [2.0, 4.0, 16.0].iter().map(|s| axis(n, *s)).collect();
    attempt(report, "inversion", verify_riesz_inversion(&one, 1.0, &pts, p, &pv, kc));
    // the sub-reports carry the same tables; keep one consistent set
    report.tables.retain(|t| !matches!(t.name.as_str(), "k_vs_pairing" | "k_vs_I1" | "r_vs_I2"));
    report.tables.extend(trace.tables());
}

fn equivalence(report: &mut Report, o: &SuiteOptions, kc: &KernelConstants) {
    let p = &o.params;
    let n = p.n;
    let mut bopts = BubbleOptions::for_dim(n);
    bopts.pv = o.pv();
    bopts.spectral = o.spectral();
    let pts: Vec<Vec<f64>> = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [3.0, 3.0, 0.0]]
        .iter()
        .map(|b| b[..n].to_vec())
        .collect();
    let origin = vec![0.0; n];
    let base = match verify_bubble(1.0, &origin, p, &pts, &bopts, kc) {
        Ok(b) => b,
        Err(e) => return fail(report, "bubble", &e),
    };
    let mean = base.mean;
    report.absorb("bubble", base.report);

    let x0 = [2.0, -1.0, 0.0][..n].to_vec();
    let shifted: Vec<Vec<f64>> = pts.iter().map(|x| x.iter().zip(&x0).map(|(a, b)| a + b).collect()).collect();
    match verify_bubble(1.0, &x0, p, &shifted, &bopts, kc) {
        Ok(b) => {
            report.case_le("translated bubble mean ratio", "relative change", (b.mean / mean - 1.0).abs(), 1e-3);
        }
        Err(e) => fail(report, "translated bubble", &e),
    }
    // the ratio is scale invariant; points and box scale with t
    let scaled: Vec<Vec<f64>> = pts.iter().map(|x| x.iter().map(|v| 4.0 * v).collect()).collect();
    let mut wide = bopts.clone();
    wide.spectral.half_width *= 4.0;
    match verify_bubble(4.0, &origin, p, &scaled, &wide, kc) {
        Ok(b) => {
            report.case_le("scaled bubble mean ratio", "relative change", (b.mean / mean - 1.0).abs(), 1e-3);
        }
        Err(e) => fail(report, "scaled bubble", &e),
    }
    let mut sub = bopts.clone();
    sub.p = Some(p.critical_p() - 0.5);
    match verify_bubble(1.0, &origin, p, &pts, &sub, kc) {
        Ok(b) => {
            report.case("subcritical exponent breaks the ratio", "spread", b.spread, 0.1, b.spread > 0.1);
        }
        Err(e) => fail(report, "subcritical bubble", &e),
    }

    attempt(report, "pde_to_integral", (|| {
        let pc = p.critical_p();
        let c = mean.powf(1.0 / (pc - 1.0));
        let u = make_catalog_field("bubble", p, &[1.0])?.scaled(c);
        let pts: Vec<Vec<f64>> =
            [[0.0, 0.0, 0.0], [0.5, 0.0, 0.0], [0.0, -0.7, 0.0]].iter().map(|b| b[..n].to_vec()).collect();
        // v - v_R = O(R^{α-n}); run R out to where that rate reaches 2^-6
        let r_max = 2f64.powf((6.0 / (p.nf() - p.alpha)).ceil().max(6.0));
        verify_pde_to_integral(&u, pc, &dyadic(4.0, r_max), p, &pts, kc)
    })());
    attempt(
        report,
        "divergence",
        divergence_check(p, 1.0, &dyadic(1.0, 64.0), &origin, kc).map(|d| d.report),
    );
}
