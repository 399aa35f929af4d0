use crate::{Result, SpectralError, Vec3};
use selfprop_core::surface::solid_angle;
use selfprop_core::{RigidMotion, Surface};
use std::f64::consts::PI;

/// Flux carrier `𝒲 = Φ ∇(1/(4π|x − x₀|))` with the source point inside the
/// body; divergence-free away from `x₀` and carrying flux `Φ` through the
/// boundary (normal pointing into the body).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxCarrier {
    pub flux: f64,
    pub x0: Vec3,
}

/// Builds the carrier after checking that `x₀` lies strictly inside the body
/// bounded by `surface`.
pub fn flux_lift(flux: f64, x0: Vec3, surface: &Surface) -> Result<FluxCarrier> {
    let winding: f64 = surface
        .triangles
        .iter()
        .map(|t| {
            let [a, b, c] = surface.corners(t);
            solid_angle(&(a - x0), &(b - x0), &(c - x0))
        })
        .sum::<f64>()
        / (4.0 * PI);
    let clearance = surface.vertices.iter().map(|v| (v - x0).norm()).fold(f64::INFINITY, f64::min);
    if (winding - 1.0).abs() > 1e-6 || clearance < 1e-12 {
        return Err(SpectralError::Domain(format!(
            "x₀ = ({:.4}, {:.4}, {:.4}) is not strictly inside the body (winding number {winding:.6})",
            x0.x, x0.y, x0.z
        )));
    }
    Ok(FluxCarrier { flux, x0 })
}

impl FluxCarrier {
    /// `𝒲(x) = −Φ (x − x₀)/(4π|x − x₀|³)`.
    pub fn eval(&self, x: &Vec3) -> Vec3 {
        if self.flux == 0.0 {
            return Vec3::zeros();
        }
        let d = x - self.x0;
        let r = d.norm();
        -d * (self.flux / (4.0 * PI * r * r * r))
    }

    /// Lifted velocity `U = u − 𝒲`.
    pub fn lift_velocity(&self, u: &Vec3, x: &Vec3) -> Vec3 {
        u - self.eval(x)
    }

    /// Lifted pressure `Q = q − (ξ + ω×x₀)·𝒲`.
    pub fn lift_pressure(&self, q: f64, motion: &RigidMotion, x: &Vec3) -> f64 {
        q - (motion.xi + motion.omega.cross(&self.x0)).dot(&self.eval(x))
    }
}
