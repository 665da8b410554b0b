use fraclap::equivalence::{verify_bubble, verify_pde_to_integral, BubbleOptions};
use fraclap::operator::{validate_constants, KernelConstants, PvQuadConfig};
use fraclap::{make_catalog_field, FracError, FracParams, ScalarField};

fn setup(n: usize, alpha: f64) -> (FracParams, KernelConstants) {
    let p = FracParams::new(n, alpha).unwrap();
    let k = validate_constants(&p, &PvQuadConfig::default()).unwrap();
    (p, k)
}

fn pts(n: usize) -> Vec<Vec<f64>> {
    [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [3.0, 3.0, 0.0]].iter().map(|x| x[..n].to_vec()).collect()
}

#[test]
fn bubble_ratio_is_flat_in_2d() {
    for a in [0.5, 1.0, 1.5] {
        let (p, k) = setup(2, a);
        let out = verify_bubble(1.0, &[0.0, 0.0], &p, &pts(2), &BubbleOptions::for_dim(2), &k).unwrap();
        assert!(out.report.overall_pass(), "α={a}: {:#?}", out.report.cases);
        assert!(out.spread <= 0.01);
    }
}

#[test]
fn subcritical_exponent_breaks_the_ratio() {
    let (p, k) = setup(2, 1.0);
    let opts = BubbleOptions { p: Some(p.critical_p() - 0.5), ..BubbleOptions::for_dim(2) };
    let out = verify_bubble(1.0, &[0.0, 0.0], &p, &pts(2), &opts, &k).unwrap();
    assert!(out.spread > 0.1);
    assert!(!out.report.overall_pass());
}

#[test]
fn bubble_rejects_bad_input() {
    let (p, k) = setup(2, 1.0);
    let o = BubbleOptions::for_dim(2);
    assert!(verify_bubble(0.0, &[0.0, 0.0], &p, &pts(2), &o, &k).is_err());
    assert!(verify_bubble(1.0, &[0.0, 0.0], &p, &[], &o, &k).is_err());
    let dup = vec![vec![1.0, 0.0], vec![1.0, 0.0]];
    assert!(verify_bubble(1.0, &[0.0, 0.0], &p, &dup, &o, &k).is_err());
}

#[test]
fn pde_to_integral_for_zero_and_bad_points() {
    let (p, k) = setup(2, 1.0);
    let zero = ScalarField::zero(2);
    let report = verify_pde_to_integral(&zero, p.critical_p(), &[4.0, 8.0], &p, &[vec![0.0, 0.0]], &k).unwrap();
    assert!(report.cases.iter().all(|c| c.value.abs() <= 1e-15 || c.pass), "{:#?}", report.cases);
    let bubble = make_catalog_field("bubble", &p, &[1.0]).unwrap();
    let err = verify_pde_to_integral(&bubble, p.critical_p(), &[4.0, 8.0], &p, &[vec![5.0, 0.0]], &k);
    assert!(matches!(err, Err(FracError::Precondition(_))));
    assert!(verify_pde_to_integral(&bubble, 1.0, &[4.0, 8.0], &p, &[vec![0.0, 0.0]], &k).is_err());
}
