//! The two evaluators of `(-Δ)^{α/2}` and the constants tying them together.

pub mod constants;
pub mod pv;
pub mod selfadjoint;
pub mod spectral;

pub use constants::{c_pv, c_riesz, validate_constants, KernelConstants};
pub use pv::{fraclap_pv, EvalResult, PvQuadConfig};
pub use selfadjoint::verify_selfadjoint_identity;
pub use spectral::{fraclap_spectral, fraclap_spectral_periodic, fraclap_spectral_points, SpectralConfig};
