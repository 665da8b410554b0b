//! Log-log least squares for asymptotic decay exponents.

use crate::error::{FracError, Result};
use crate::field::ScalarField;

/// Least-squares slope and intercept of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(FracError::Fit("need at least two matching samples".into()));
    }
    let mut lx = Vec::with_capacity(xs.len());
    let mut ly = Vec::with_capacity(xs.len());
    for (&x, &y) in xs.iter().zip(ys) {
        let y = y.abs();
        if !(x > 0.0) || !(y > 0.0) || !y.is_finite() {
            return Err(FracError::Fit(format!("cannot take the log of sample ({x}, {y})")));
        }
        lx.push(x.ln());
        ly.push(y.ln());
    }
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(FracError::Fit("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Empirical `β` in `|f(r·dir)| ~ r^{-β}` from samples at `radii`.
pub fn fit_decay_exponent(f: &ScalarField, radii: &[f64], direction: &[f64]) -> Result<f64> {
    fit_decay_with(|p| f.eval(p), f.dim(), f.support_radius, radii, direction)
}

/// Same as [`fit_decay_exponent`] for any evaluator.
pub fn fit_decay_with<F: Fn(&[f64]) -> f64>(
    f: F,
    dim: usize,
    support_radius: Option<f64>,
    radii: &[f64],
    direction: &[f64],
) -> Result<f64> {
    if radii.len() < 4 {
        return Err(FracError::Fit("need at least 4 radii".into()));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(FracError::Fit("radii must increase".into()));
    }
    if let Some(s) = support_radius {
        if radii[0] <= s {
            return Err(FracError::Fit(format!("radius {} lies inside the support radius {s}", radii[0])));
        }
    }
    if direction.len() != dim {
        return Err(FracError::DimensionMismatch { expected: dim, got: direction.len() });
    }
    let dn = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    let values: Vec<f64> = radii
        .iter()
        .map(|r| {
            let p: Vec<f64> = direction.iter().map(|d| r * d / dn).collect();
            f(&p)
        })
        .collect();
    let (slope, _) = loglog_slope(radii, &values)?;
    Ok(-slope)
}

/// Dyadic radii `lo, 2lo, ..., hi`.
pub fn dyadic(lo: f64, hi: f64) -> Vec<f64> {
    let mut out = vec![lo];
    while *out.last().unwrap() * 2.0 <= hi * (1.0 + 1e-12) {
        let next = out.last().unwrap() * 2.0;
        out.push(next);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::power_law;

    #[test]
    fn exact_power_law() {
        let f = power_law(2, 1.0, 3.0);
        let b = fit_decay_exponent(&f, &[8.0, 16.0, 32.0, 64.0], &[1.0, 0.0]).unwrap();
        assert!((b - 3.0).abs() < 1e-6);
    }

    #[test]
    fn zero_sample_is_an_error() {
        let f = ScalarField::new(2, "z", |_| 0.0);
        assert!(fit_decay_exponent(&f, &[8.0, 16.0, 32.0, 64.0], &[1.0, 0.0]).is_err());
        let f = ScalarField::new(2, "nan", |_| f64::NAN);
        assert!(fit_decay_exponent(&f, &[8.0, 16.0, 32.0, 64.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn too_few_radii() {
        let f = power_law(2, 1.0, 3.0);
        assert!(fit_decay_exponent(&f, &[8.0, 16.0, 32.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn dyadic_window() {
        assert_eq!(dyadic(16.0, 128.0), vec![16.0, 32.0, 64.0, 128.0]);
    }

    proptest::proptest! {
        #[test]
        fn recovers_any_power_law(beta in 0.1f64..6.0, c in 0.01f64..100.0) {
            let f = power_law(3, c, beta);
            let b = fit_decay_exponent(&f, &dyadic(16.0, 128.0), &[0.3, -0.4, 0.5]).unwrap();
            proptest::prop_assert!((b - beta).abs() <= 1e-6 * beta);
        }
    }
}
