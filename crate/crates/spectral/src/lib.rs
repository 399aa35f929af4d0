//! Whole-space spectral oracle.
//!
//! Solves the Oseen system (ω = 0) and the rotating Oseen system written in
//! the Mozzi–Chasles frame (ω ≠ 0) on the Fourier side, mode by mode, with
//! analytically known forcing so that every mode can be evaluated off the
//! lattice as well. On top of the solvers sit the `J±` low-frequency
//! integrals, the L²-estimate audit and the flux carrier used to lift
//! non-zero boundary fluxes.
//!
//! Fourier convention: `v̂(ζ) = ∫ e^{−iζ·y} v(y) dy`, so `∂_j ↔ iζ_j`.

pub mod error;
pub mod estimate;
pub mod flux;
pub mod forcing;
pub mod frame;
pub mod grid;
pub mod jpm;
pub mod solve;

pub use error::{Result, SpectralError};
pub use flux::{flux_lift, FluxCarrier};
pub use estimate::{k_quantity, l2_bound_check, L2Options, L2Report, Norms};
pub use forcing::{ForcingPair, GTerm, TensorTerm};
pub use frame::{mozzi_chasles, MozziChaslesFrame};
pub use grid::SpectralGrid;
pub use jpm::{jpm_integral, JpmValue};
pub use solve::{
    forcing_lattice, leray, leray_pressure, oseen_fourier_solve, oseen_mode, oseen_residual, rot_oseen_fourier_solve,
    rot_oseen_mode, rot_residual, ModeValue, RotSolution, TimeQuad,
};

pub use num_complex::Complex64;

/// Complex 3-vector.
pub type CVec3 = nalgebra::Vector3<Complex64>;
/// Real 3-vector.
pub type Vec3 = selfprop_core::Vec3;
/// Real 3×3 matrix.
pub type Mat3 = selfprop_core::Mat3;

/// Below this `|ω|` the non-rotating formula is used.
pub const OMEGA_THRESHOLD: f64 = 1e-8;

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub(crate) fn to_c(v: &Vec3) -> CVec3 {
    CVec3::new(c(v.x), c(v.y), c(v.z))
}

/// Rotation by angle `t` about `e_1`.
pub fn rot_e1(t: f64) -> Mat3 {
    let (s, co) = t.sin_cos();
    Mat3::new(1.0, 0.0, 0.0, 0.0, co, -s, 0.0, s, co)
}
