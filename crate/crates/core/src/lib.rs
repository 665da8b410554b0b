//! Numerical toolkit for the fractional Laplacian `(-Δ)^{α/2}` on `R^n`
//! (n = 2, 3) and verification suites for the identities built on it.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod field;
pub mod fit;
pub mod grid;
pub mod params;
pub mod quad;
pub mod report;
pub mod sphere;
pub mod spline;

pub use error::{FracError, Result};
pub use field::{make_catalog_field, ScalarField};
pub use fit::fit_decay_exponent;
pub use grid::GridField;
pub use params::FracParams;
pub use report::Report;
pub mod kernels;
pub mod operator;
pub mod equivalence;
pub mod liouville;
pub mod suites;
