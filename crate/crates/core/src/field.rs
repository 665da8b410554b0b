//! Evaluatable scalar fields on `R^n` with the analytic metadata the
//! evaluators need to model integral tails.

use std::fmt;
use std::sync::Arc;

use crate::error::{FracError, Result};
use crate::params::{norm, sphere_area, FracParams};
use crate::quad::{integrate, QuadOpts};

pub type EvalFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A function `R^n -> R` plus what is known about it analytically.
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    eval: EvalFn,
    /// `β` with `|f(x)| = O(|x|^{-β})`; `f64::INFINITY` for faster than any power.
    pub decay_exponent: Option<f64>,
    pub bounded: bool,
    /// Radial about the origin.
    pub is_radial: bool,
    /// `f(x) = 0` for `|x| > support_radius`.
    pub support_radius: Option<f64>,
    /// `∫ f = 0` holds exactly.
    pub moment_zero: bool,
    /// Radius of a sphere about the origin across which `f` is only Hölder
    /// continuous (e.g. the seam of an exterior extension).
    pub kink_radius: Option<f64>,
    pub label: String,
    /// Exact decomposition `Σ c_i g_i(x - a_i)` into translated radial
    /// fields, when known. Convolution operators act on each term
    /// separately.
    pub radial_terms: Option<Arc<Vec<RadialTerm>>>,
}

#[derive(Clone, Debug)]
pub struct RadialTerm {
    pub coef: f64,
    pub shift: Vec<f64>,
    pub profile: ScalarField,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("decay_exponent", &self.decay_exponent)
            .field("bounded", &self.bounded)
            .field("is_radial", &self.is_radial)
            .field("support_radius", &self.support_radius)
            .field("moment_zero", &self.moment_zero)
            .field("kink_radius", &self.kink_radius)
            .finish()
    }
}

impl ScalarField {
    pub fn new<F>(dim: usize, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            dim,
            eval: Arc::new(f),
            decay_exponent: None,
            bounded: false,
            is_radial: false,
            support_radius: None,
            moment_zero: false,
            kink_radius: None,
            label: label.into(),
            radial_terms: None,
        }
    }

    /// Radial field from its profile `r -> f(r)`.
    pub fn radial<F>(dim: usize, label: impl Into<String>, profile: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let mut out = Self::new(dim, label, move |x: &[f64]| profile(norm(x)));
        out.is_radial = true;
        out
    }

    pub fn zero(dim: usize) -> Self {
        let mut z = Self::new(dim, "zero", |_| 0.0);
        z.is_radial = true;
        z.bounded = true;
        z.support_radius = Some(0.0);
        z.moment_zero = true;
        z
    }

    pub fn with_decay(mut self, beta: f64) -> Self {
        self.decay_exponent = Some(beta);
        self
    }
    pub fn with_bounded(mut self) -> Self {
        self.bounded = true;
        self
    }
    pub fn with_support(mut self, r: f64) -> Self {
        self.support_radius = Some(r);
        self.bounded = true;
        self
    }
    pub fn with_moment_zero(mut self) -> Self {
        self.moment_zero = true;
        self
    }
    pub fn with_kink(mut self, r: f64) -> Self {
        self.kink_radius = Some(r);
        self
    }
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
    pub fn mark_radial(mut self) -> Self {
        self.is_radial = true;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The translated-radial decomposition, with a radial field being its
    /// own single term.
    pub fn terms(&self) -> Option<Vec<RadialTerm>> {
        if let Some(t) = &self.radial_terms {
            return Some(t.as_ref().clone());
        }
        if self.is_radial {
            let mut profile = self.clone();
            profile.radial_terms = None;
            return Some(vec![RadialTerm { coef: 1.0, shift: vec![0.0; self.dim], profile }]);
        }
        None
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        if let Some(r) = self.support_radius {
            if norm(x) > r {
                return 0.0;
            }
        }
        (self.eval)(x)
    }

    /// Value of a radial field at radius `r` (along the first axis).
    pub fn eval_radius(&self, r: f64) -> f64 {
        let mut p = [0.0; 3];
        p[0] = r;
        self.eval(&p[..self.dim])
    }

    /// The underlying closure, shared by clones; identifies a profile.
    pub fn eval_raw_ptr(&self) -> EvalFn {
        self.eval.clone()
    }

    pub fn eval_fn(&self) -> EvalFn {
        let f = self.clone();
        Arc::new(move |x| f.eval(x))
    }

    /// Whether the metadata certifies membership in `L_α`.
    pub fn certified_in_l_alpha(&self, params: &FracParams) -> bool {
        self.support_radius.is_some()
            || self.bounded
            || self.decay_exponent.is_some_and(|b| b > -params.alpha)
    }

    /// Effective decay used by tail models: `Some(∞)` for compact support,
    /// `Some(0)` for bounded fields without a known decay rate.
    pub fn tail_exponent(&self) -> Option<f64> {
        if self.support_radius.is_some() {
            Some(f64::INFINITY)
        } else if let Some(b) = self.decay_exponent {
            Some(b)
        } else if self.bounded {
            Some(0.0)
        } else {
            None
        }
    }

    /// `∫ |f(x)| / (1 + |x|^{n+α}) dx` for radial fields (truncated radial
    /// quadrature plus an analytic tail bound). Non-radial fields are
    /// integrated over spheres.
    pub fn l_alpha_norm(&self, params: &FracParams) -> Result<f64> {
        if !self.certified_in_l_alpha(params) {
            return Err(FracError::TailUnmodeled(format!("`{}` has no decay metadata", self.label)));
        }
        let n = params.n;
        let s = params.nf() + params.alpha;
        let r_max = self.support_radius.unwrap_or(1e3);
        let opts = QuadOpts::new(1e-12, 1e-9).with_max_panels(2000);
        let shell = |r: f64| -> f64 {
            if self.is_radial {
                sphere_area(n) * self.eval_radius(r).abs()
            } else {
                crate::sphere::sphere_integral(
                    n,
                    |w| {
                        let mut p = [0.0; 3];
                        for d in 0..n {
                            p[d] = r * w[d];
                        }
                        (self.eval(&p[..n]).abs(), 0.0)
                    },
                    &QuadOpts::new(1e-12, 1e-8),
                )
                .value
            }
        };
        let q = integrate(
            |t: f64| {
                let r = t.exp();
                shell(r) * r.powi(n as i32) / (1.0 + r.powf(s))
            },
            (1e-8f64).ln(),
            r_max.ln(),
            &opts,
        );
        let mut total = q.value;
        if self.support_radius.is_none() {
            let beta = self.tail_exponent().unwrap_or(0.0).min(50.0);
            // sup of shell(r) r^β beyond r_max estimated at r_max
            let c = shell(r_max) * r_max.powf(beta);
            total += c * r_max.powf(-(params.alpha + beta)) / (params.alpha + beta);
        }
        Ok(total)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let f = self.eval.clone();
        let mut out = self.clone();
        out.eval = Arc::new(move |x| c * f(x));
        out.label = format!("{c}*{}", self.label);
        out.radial_terms = self.radial_terms.as_ref().map(|t| {
            Arc::new(t.iter().map(|r| RadialTerm { coef: c * r.coef, ..r.clone() }).collect())
        });
        out
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &ScalarField, b: f64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(FracError::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let (f, g) = (self.clone(), other.clone());
        let mut out = Self::new(self.dim, format!("{a}*{}+{b}*{}", self.label, other.label), move |x| {
            a * f.eval(x) + b * g.eval(x)
        });
        out.decay_exponent = match (self.tail_exponent(), other.tail_exponent()) {
            (Some(p), Some(q)) => Some(p.min(q)),
            _ => None,
        }
        .filter(|_| self.support_radius.is_none() || other.support_radius.is_none());
        out.bounded = self.bounded && other.bounded;
        out.is_radial = self.is_radial && other.is_radial;
        out.support_radius = match (self.support_radius, other.support_radius) {
            (Some(p), Some(q)) => Some(p.max(q)),
            _ => None,
        };
        out.moment_zero = self.moment_zero && other.moment_zero;
        // a support sphere that is not the support of the sum becomes a seam
        let inner = match (self.support_radius, other.support_radius) {
            (Some(p), None) | (None, Some(p)) => Some(p),
            (Some(p), Some(q)) if p != q => Some(p.min(q)),
            _ => None,
        };
        out.kink_radius = self.kink_radius.or(other.kink_radius).or(inner);
        if !out.is_radial {
            if let (Some(p), Some(q)) = (self.terms(), other.terms()) {
                let mut all: Vec<RadialTerm> =
                    p.into_iter().map(|t| RadialTerm { coef: a * t.coef, ..t }).collect();
                all.extend(q.into_iter().map(|t| RadialTerm { coef: b * t.coef, ..t }));
                out.radial_terms = Some(Arc::new(all));
            }
        }
        Ok(out)
    }

    /// `x -> f(x - h)`.
    pub fn translated(&self, h: &[f64]) -> Self {
        let f = self.eval.clone();
        let support = self.support_radius;
        let shift = h.to_vec();
        let mut out = self.clone();
        out.eval = Arc::new(move |x| {
            let mut y = [0.0; 3];
            for d in 0..x.len() {
                y[d] = x[d] - shift[d];
            }
            let y = &y[..x.len()];
            if let Some(r) = support {
                if norm(y) > r {
                    return 0.0;
                }
            }
            f(y)
        });
        let hn = norm(h);
        if hn > 0.0 {
            out.is_radial = false;
            out.kink_radius = None;
            out.support_radius = support.map(|r| r + hn);
            out.radial_terms = self.terms().map(|t| {
                Arc::new(
                    t.into_iter()
                        .map(|r| RadialTerm { shift: r.shift.iter().zip(h).map(|(a, b)| a + b).collect(), ..r })
                        .collect(),
                )
            });
        }
        out.label = format!("{}(x-h)", self.label);
        out
    }

    /// `x -> f(λx)`.
    pub fn dilated(&self, lambda: f64) -> Self {
        let f = self.eval.clone();
        let support = self.support_radius;
        let mut out = self.clone();
        out.eval = Arc::new(move |x| {
            let mut y = [0.0; 3];
            for d in 0..x.len() {
                y[d] = lambda * x[d];
            }
            let y = &y[..x.len()];
            if let Some(r) = support {
                if norm(y) > r {
                    return 0.0;
                }
            }
            f(y)
        });
        out.support_radius = support.map(|r| r / lambda);
        out.kink_radius = self.kink_radius.map(|r| r / lambda);
        out.label = format!("{}({lambda}x)", self.label);
        out.radial_terms = self.radial_terms.as_ref().map(|t| {
            Arc::new(
                t.iter()
                    .map(|r| RadialTerm {
                        coef: r.coef,
                        shift: r.shift.iter().map(|a| a / lambda).collect(),
                        profile: r.profile.dilated(lambda),
                    })
                    .collect(),
            )
        });
        out
    }

    /// `x -> max(f(x), 0)^p`.
    pub fn powf(&self, p: f64) -> Self {
        let f = self.eval.clone();
        let mut out = self.clone();
        out.eval = Arc::new(move |x| f(x).max(0.0).powf(p));
        out.decay_exponent = self.decay_exponent.map(|b| b * p);
        out.moment_zero = false;
        out.radial_terms = None;
        out.label = format!("{}^{p}", self.label);
        out
    }
}

/// Smooth bump profile `exp(1 - 1/(1 - s²))` on `s < 1`.
pub fn bump_profile(s: f64) -> f64 {
    if s >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

/// `∫_{B_radius} bump_profile(|x|/radius) dx`.
pub fn bump_mass(n: usize, radius: f64) -> f64 {
    let q = integrate(
        |s| s.powi(n as i32 - 1) * bump_profile(s),
        0.0,
        1.0,
        &QuadOpts::new(1e-15, 1e-13),
    );
    sphere_area(n) * radius.powi(n as i32) * q.value
}

fn bad(field: &str, reason: impl Into<String>) -> FracError {
    FracError::BadArgs { field: field.into(), reason: reason.into() }
}

/// Builds one of the analytically known test fields.
///
/// * `constant [c]`
/// * `gaussian [] | [width]`: `exp(-|x|²/width²)`
/// * `bubble [t] | [t, x0..] | [t, x0.., c]`: `c (t / (t² + |x-x0|²))^{(n-α)/2}`
/// * `bump [] | [radius] | [radius, mass]`
/// * `dipole [] | [a..]`: `g(x-a) - g(x+a)` with `g` the unit bump, `a = (2,0,..)` by default
pub fn make_catalog_field(name: &str, params: &FracParams, args: &[f64]) -> Result<ScalarField> {
    let n = params.n;
    if args.iter().any(|a| !a.is_finite()) {
        return Err(bad(name, "arguments must be finite"));
    }
    match name {
        "constant" => {
            let [c] = args else { return Err(bad(name, "expects exactly one value")) };
            let c = *c;
            Ok(ScalarField::radial(n, format!("constant({c})"), move |_| c).with_bounded())
        }
        "gaussian" => {
            let w = match args {
                [] => 1.0,
                [w] if *w > 0.0 => *w,
                _ => return Err(bad(name, "expects [] or [width > 0]")),
            };
            let inv = 1.0 / (w * w);
            Ok(ScalarField::radial(n, "gaussian", move |r| (-r * r * inv).exp())
                .with_bounded()
                .with_decay(f64::INFINITY))
        }
        "bubble" => {
            let (t, x0, c) = match args.len() {
                1 => (args[0], vec![0.0; n], 1.0),
                l if l == 1 + n => (args[0], args[1..].to_vec(), 1.0),
                l if l == 2 + n => (args[0], args[1..=n].to_vec(), args[n + 1]),
                _ => return Err(bad(name, format!("expects [t], [t, x0 ({n})] or [t, x0, c]"))),
            };
            if !(t > 0.0) {
                return Err(bad(name, "scale t must be positive"));
            }
            let e = 0.5 * (params.nf() - params.alpha);
            let centered = x0.iter().all(|v| *v == 0.0);
            let center = x0.clone();
            let mut f = ScalarField::new(n, format!("bubble(t={t})"), move |x| {
                let d2: f64 = x.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum();
                c * (t / (t * t + d2)).powf(e)
            })
            .with_bounded()
            .with_decay(params.nf() - params.alpha);
            f.is_radial = centered;
            Ok(f)
        }
        "bump" => {
            let (radius, mass) = match args {
                [] => (1.0, None),
                [r] => (*r, None),
                [r, m] => (*r, Some(*m)),
                _ => return Err(bad(name, "expects [], [radius] or [radius, mass]")),
            };
            if !(radius > 0.0) {
                return Err(bad(name, "radius must be positive"));
            }
            let amp = mass.map(|m| m / bump_mass(n, radius)).unwrap_or(1.0);
            Ok(ScalarField::radial(n, "bump", move |r| amp * bump_profile(r / radius)).with_support(radius))
        }
        "dipole" => {
            let a: Vec<f64> = match args.len() {
                0 => {
                    let mut a = vec![0.0; n];
                    a[0] = 2.0;
                    a
                }
                l if l == n => args.to_vec(),
                _ => return Err(bad(name, format!("expects [] or a shift of length {n}"))),
            };
            let an = norm(&a);
            if an < 1.0 {
                return Err(bad(name, "lobes must not overlap (|a| >= 1)"));
            }
            let shift = a.clone();
            let lobe = ScalarField::radial(n, "bump", bump_profile).with_support(1.0);
            let neg: Vec<f64> = a.iter().map(|v| -v).collect();
            let terms = vec![
                RadialTerm { coef: 1.0, shift: a.clone(), profile: lobe.clone() },
                RadialTerm { coef: -1.0, shift: neg, profile: lobe },
            ];
            let mut f = ScalarField::new(n, "dipole", move |x| {
                let mut p2 = 0.0;
                let mut m2 = 0.0;
                for d in 0..x.len() {
                    p2 += (x[d] - shift[d]).powi(2);
                    m2 += (x[d] + shift[d]).powi(2);
                }
                bump_profile(p2.sqrt()) - bump_profile(m2.sqrt())
            });
            f.radial_terms = Some(Arc::new(terms));
            Ok(f.with_support(an + 1.0).with_moment_zero())
        }
        other => Err(FracError::UnknownField(other.to_string())),
    }
}

/// `c / |x|^β` away from the origin; test helper for exact power laws.
pub fn power_law(dim: usize, c: f64, beta: f64) -> ScalarField {
    ScalarField::radial(dim, format!("{c}/|x|^{beta}"), move |r| c * r.powf(-beta)).with_decay(beta)
}
