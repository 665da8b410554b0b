//! Property tests for the operator, kernel and catalog invariants.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use fraclap::field::power_law;
use fraclap::fit::fit_decay_exponent;
use fraclap::kernels::{green_function, green_solve_ball, poisson_extend, poisson_kernel, PoissonExtension};
use fraclap::operator::{fraclap_pv, validate_constants, KernelConstants, PvQuadConfig};
use fraclap::{make_catalog_field, FracParams, Report, ScalarField};
use proptest::prelude::*;

fn p21() -> FracParams {
    FracParams::new(2, 1.0).unwrap()
}

fn kc(p: &FracParams) -> KernelConstants {
    validate_constants(p, &PvQuadConfig::default()).unwrap()
}

fn dir(n: usize, theta: f64, phi: f64) -> Vec<f64> {
    let v = [theta.cos() * phi.sin(), theta.sin() * phi.sin(), phi.cos()];
    if n == 2 {
        vec![theta.cos(), theta.sin()]
    } else {
        v.to_vec()
    }
}

fn ext1(n: usize, alpha: f64, k: f64) -> PoissonExtension {
    let p = FracParams::new(n, alpha).unwrap();
    poisson_extend(&make_catalog_field("constant", &p, &[1.0]).unwrap(), k, &p).unwrap()
}

fn pv(f: &ScalarField, x: &[f64], p: &FracParams) -> (f64, f64) {
    let e = fraclap_pv(f, x, p, &PvQuadConfig::default(), &kc(p)).unwrap();
    (e.value, e.error_estimate)
}

fn gaussian_bump_pair() -> &'static (ScalarField, ScalarField) {
    static PAIR: OnceLock<(ScalarField, ScalarField)> = OnceLock::new();
    PAIR.get_or_init(|| {
        let p = p21();
        (make_catalog_field("gaussian", &p, &[]).unwrap(), make_catalog_field("bump", &p, &[1.5]).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn catalog_support_is_honest(which in 0usize..2, n in 2usize..=3, theta in 0.0..TAU, phi in 0.0..PI) {
        let p = FracParams::new(n, 1.0).unwrap();
        let f = match which {
            0 => make_catalog_field("bump", &p, &[1.3]).unwrap(),
            _ => make_catalog_field("dipole", &p, &[]).unwrap(),
        };
        let s = f.support_radius.unwrap();
        let x: Vec<f64> = dir(n, theta, phi).iter().map(|d| 1.01 * s * d).collect();
        prop_assert_eq!(f.eval(&x), 0.0);
    }

    #[test]
    fn fit_recovers_exact_power_laws(beta in 0.2..4.0f64, c in 0.1..10.0f64, n in 2usize..=3) {
        let f = power_law(n, c, beta);
        let mut d = vec![0.0; n];
        d[n - 1] = 1.0;
        let got = fit_decay_exponent(&f, &[8.0, 16.0, 32.0, 64.0], &d).unwrap();
        prop_assert!((got / beta - 1.0).abs() < 1e-6);
    }

    #[test]
    fn overall_pass_is_the_conjunction(flags in proptest::collection::vec(any::<bool>(), 0..12)) {
        let mut r = Report::new("p", &p21());
        for (i, f) in flags.iter().enumerate() {
            r.case(format!("c{i}"), "m", 0.0, 0.0, *f);
        }
        prop_assert_eq!(r.overall_pass(), flags.iter().all(|f| *f));
    }

    #[test]
    fn constants_are_annihilated(c in -5.0..5.0f64, x in -6.0..6.0f64, y in -6.0..6.0f64) {
        let p = p21();
        let f = make_catalog_field("constant", &p, &[c]).unwrap();
        prop_assert!(pv(&f, &[x, y], &p).0.abs() <= 1e-8);
    }

    #[test]
    fn kernel_positivity(n in 2usize..=3, alpha in 0.1..1.9f64, k in 0.5..4.0f64,
                         sy in 0.0..0.99f64, sx in 1.01..6.0f64, t1 in 0.0..TAU, t2 in 0.0..TAU,
                         u in 0.0..0.99f64) {
        let p = FracParams::new(n, alpha).unwrap();
        let y: Vec<f64> = dir(n, t1, 1.0).iter().map(|d| sy * k * d).collect();
        let x: Vec<f64> = dir(n, t2, 2.0).iter().map(|d| sx * k * d).collect();
        prop_assert!(poisson_kernel(&y, &x, k, &p).unwrap() > 0.0);
        let z: Vec<f64> = dir(n, t2, 0.5).iter().map(|d| u * k * d).collect();
        if y != z {
            prop_assert!(green_function(&y, &z, k, &p).unwrap() > 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn fraclap_is_linear(a in -2.0..2.0f64, b in -2.0..2.0f64, x in -2.0..2.0f64, y in -2.0..2.0f64) {
        let p = p21();
        let (f, g) = gaussian_bump_pair();
        let h = f.combine(a, g, b).unwrap();
        let x = [x, y];
        let (vh, eh) = pv(&h, &x, &p);
        let (vf, ef) = pv(f, &x, &p);
        let (vg, eg) = pv(g, &x, &p);
        let tol = eh + a.abs() * ef + b.abs() * eg + 1e-9;
        prop_assert!((vh - a * vf - b * vg).abs() <= tol, "{} vs {}", vh, a * vf + b * vg);
    }

    #[test]
    fn fraclap_commutes_with_translation(hx in -3.0..3.0f64, hy in -3.0..3.0f64, x in -1.5..1.5f64, y in -1.5..1.5f64) {
        let p = p21();
        let f = &gaussian_bump_pair().1;
        let moved = f.translated(&[hx, hy]);
        let a = pv(&moved, &[x + hx, y + hy], &p).0;
        let b = pv(f, &[x, y], &p).0;
        prop_assert!((a - b).abs() <= 1e-6 * b.abs().max(1e-3));
    }

    #[test]
    fn fraclap_scales_like_lambda_alpha(lambda in prop::sample::select(vec![0.5, 2.0]), alpha in prop::sample::select(vec![0.5, 1.0, 1.5]),
                                        x in -1.0..1.0f64, y in -1.0..1.0f64) {
        let p = FracParams::new(2, alpha).unwrap();
        let f = make_catalog_field("gaussian", &p, &[]).unwrap();
        let fl = f.dilated(lambda);
        let a = pv(&fl, &[x, y], &p).0;
        let b = lambda.powf(alpha) * pv(&f, &[lambda * x, lambda * y], &p).0;
        prop_assert!((a - b).abs() <= 1e-3 * b.abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn extension_of_one_lies_in_unit_interval(n in 2usize..=3, alpha in prop::sample::select(vec![0.5, 1.0, 1.5]),
                                              s in 1.0..200.0f64, t in 0.0..TAU) {
        let ext = ext1(n, alpha, 1.0);
        let x: Vec<f64> = dir(n, t, 1.1).iter().map(|d| s * d).collect();
        let v = ext.eval(&x);
        prop_assert!(v > 0.0 && v <= 1.0, "u_k = {}", v);
    }

    #[test]
    fn larger_ball_extension_dominates(n in 2usize..=3, alpha in prop::sample::select(vec![0.5, 1.0, 1.5]),
                                       k1 in 0.5..2.0f64, ratio in 1.1..4.0f64, s in 1.01..50.0f64, t in 0.0..TAU) {
        let k2 = k1 * ratio;
        let x: Vec<f64> = dir(n, t, 0.7).iter().map(|d| s * k2 * d).collect();
        prop_assert!(ext1(n, alpha, k2).eval(&x) >= ext1(n, alpha, k1).eval(&x));
    }

    #[test]
    fn green_solution_vanishes_outside(n in 2usize..=3, r in 1.0..5.0f64, s in 1.0..3.0f64, t in 0.0..TAU) {
        let p = FracParams::new(n, 1.0).unwrap();
        let f = make_catalog_field("gaussian", &p, &[]).unwrap();
        let x: Vec<f64> = dir(n, t, 1.3).iter().map(|d| s * r * d).collect();
        prop_assert_eq!(green_solve_ball(&f, r, &x, &p).unwrap().value, 0.0);
    }
}
