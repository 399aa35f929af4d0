//! Shared building blocks for the self-propelled drag solver.
//!
//! * [`RigidMotion`] and the anisotropic weight [`WeightFn`],
//! * closed triangulated body surfaces ([`Surface`]) with their volume
//!   integrals, the body description [`BodyGeometry`] and the patch weight χ,
//! * Gauss–Jacobi [`quadrature`] on simplices,
//! * the piecewise-quadratic boundary space [`SurfaceSpace`] on which all
//!   boundary traces ([`TraceField`]) live, with the integrals, mass matrix
//!   and trace-norm surrogate built on it.
//!
//! Conventions: viscosity and density are 1; `n` is the unit normal of the
//! fluid domain pointing *out of the fluid*, i.e. into the body.

pub mod body;
pub mod error;
pub mod quadrature;
pub mod rigid;
pub mod sparse;
pub mod surface;
pub mod trace;
pub mod weight;

pub use body::{body_integrals, BodyGeometry, BodyIntegrals};
pub use error::{CoreError, Result};
pub use rigid::{rigid_velocity, RigidMotion};
pub use surface::Surface;
pub use trace::{SurfaceSpace, SurrogateNorm, TraceField, TraceKind};
pub use weight::{weight_eval, WeightFn};

/// Column 3-vector used throughout.
pub type Vec3 = nalgebra::Vector3<f64>;
/// 3×3 matrix used throughout.
pub type Mat3 = nalgebra::Matrix3<f64>;

/// Default tolerance for trace-kind invariants (normal component, support).
pub const TRACE_TOL: f64 = 1e-10;

/// The six rigid boundary motions `e_1, e_2, e_3, e_1×x, e_2×x, e_3×x`
/// evaluated at `x`.
pub fn rigid_basis(k: usize, x: &Vec3) -> Vec3 {
    let mut e = Vec3::zeros();
    e[k % 3] = 1.0;
    if k < 3 {
        e
    } else {
        e.cross(x)
    }
}
