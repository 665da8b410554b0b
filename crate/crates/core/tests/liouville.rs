use fraclap::liouville::{build_phi, check_i1_vanishes, check_i2_bound, trace_pairing, verify_riesz_inversion};
use fraclap::operator::{validate_constants, KernelConstants, PvQuadConfig};
use fraclap::{make_catalog_field, FracError, FracParams, ScalarField};

fn setup(n: usize, alpha: f64) -> (FracParams, KernelConstants) {
    let p = FracParams::new(n, alpha).unwrap();
    let k = validate_constants(&p, &PvQuadConfig::default()).unwrap();
    (p, k)
}

#[test]
fn phi_needs_a_zero_mean_test_function() {
    let (p, k) = setup(2, 1.0);
    let bump = make_catalog_field("bump", &p, &[]).unwrap();
    assert!(matches!(build_phi(&bump, &p, &k), Err(FracError::Precondition(_))));
    let phi = build_phi(&ScalarField::zero(2), &p, &k).unwrap();
    assert_eq!(phi.eval(&[0.3, 4.0]), 0.0);
}

#[test]
fn pairing_with_constants_vanishes() {
    let (p, _) = setup(2, 1.0);
    let psi = make_catalog_field("dipole", &p, &[]).unwrap();
    for c in [1.0, 5.0] {
        let u = make_catalog_field("constant", &p, &[c]).unwrap();
        let trace = trace_pairing(&u, &psi, &[8.0, 16.0, 32.0], 4.0, 256, &p).unwrap();
        assert!(trace.pairing_values.iter().all(|v| v.abs() <= 1e-10), "{:?}", trace.pairing_values);
        assert_eq!(trace.tables().len(), 3);
    }
    let bump = make_catalog_field("bump", &p, &[]).unwrap();
    let one = make_catalog_field("constant", &p, &[1.0]).unwrap();
    assert!(trace_pairing(&one, &bump, &[8.0], 4.0, 64, &p).is_err());
}

#[test]
fn i1_majorant_for_zero_and_bad_radius() {
    let (p, k) = setup(2, 1.0);
    let phi = make_catalog_field("gaussian", &p, &[]).unwrap();
    let zero = make_catalog_field("constant", &p, &[0.0]).unwrap();
    let out = check_i1_vanishes(&zero, &phi, &[8.0, 16.0, 32.0], 2.0, &p, &k).unwrap();
    assert!(out.rows.iter().all(|r| r.majorant == 0.0));
    let one = make_catalog_field("constant", &p, &[1.0]).unwrap();
    assert!(matches!(check_i1_vanishes(&one, &phi, &[8.0, 16.0], 8.0, &p, &k), Err(FracError::Precondition(_))));
    let out = check_i1_vanishes(&one, &phi, &[8.0, 16.0, 32.0], 2.0, &p, &k).unwrap();
    assert!(out.rows.windows(2).all(|w| w[1].majorant < w[0].majorant));
}

#[test]
fn i2_beyond_the_ball_and_for_zero() {
    let (p, k) = setup(2, 1.0);
    let cfg = PvQuadConfig::default();
    let psi = make_catalog_field("dipole", &p, &[]).unwrap();
    let phi = build_phi(&psi, &p, &k).unwrap();
    let one = make_catalog_field("constant", &p, &[1.0]).unwrap();
    let out = check_i2_bound(&one, 4.0, &[2.0, 8.0], &phi, &p, &cfg, &k).unwrap();
    assert!(out.rows[1].absolute <= 1e-3);
    assert!(out.rows[0].signed.abs() <= out.rows[0].absolute);
    assert!(out.report.overall_pass(), "{:#?}", out.report.cases);
    let zero = make_catalog_field("constant", &p, &[0.0]).unwrap();
    let out = check_i2_bound(&zero, 4.0, &[2.0, 3.0], &phi, &p, &cfg, &k).unwrap();
    assert!(out.rows.iter().all(|r| r.absolute == 0.0));
}

#[test]
fn riesz_inversion_of_the_exterior_density() {
    let (p, k) = setup(2, 1.0);
    let one = make_catalog_field("constant", &p, &[1.0]).unwrap();
    let cfg = PvQuadConfig::default();
    let report = verify_riesz_inversion(&one, 1.0, &[vec![2.0, 0.0], vec![0.0, 4.0]], &p, &cfg, &k).unwrap();
    assert!(report.overall_pass(), "{:#?}", report.cases);
    assert!(matches!(
        verify_riesz_inversion(&one, 1.0, &[vec![0.5, 0.0]], &p, &cfg, &k),
        Err(FracError::Precondition(_))
    ));
}
