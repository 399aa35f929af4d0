use crate::{Mat3, Result, SpectralError, Vec3, OMEGA_THRESHOLD};
use selfprop_core::RigidMotion;

/// Mozzi–Chasles frame `y = M(x − ω×ξ/|ω|²)` with `M ω/|ω| = e_1`; in this
/// frame the translation `ℛ e_1` is parallel to the rotation axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MozziChaslesFrame {
    pub m: Mat3,
    /// `ℛ = ω·ξ/|ω|`.
    pub r: f64,
    /// `ω×ξ/|ω|²`.
    pub shift: Vec3,
    /// `|ω|`.
    pub omega_norm: f64,
}

/// Builds the frame using the minimal rotation carrying `ω/|ω|` to `e_1`.
pub fn mozzi_chasles(motion: &RigidMotion) -> Result<MozziChaslesFrame> {
    let wn = motion.omega.norm();
    if wn <= OMEGA_THRESHOLD {
        return Err(SpectralError::OmegaBelowThreshold(wn));
    }
    let a = motion.omega / wn;
    let e1 = Vec3::x();
    let m = rotation_onto(&a, &e1);
    Ok(MozziChaslesFrame {
        m,
        r: motion.omega.dot(&motion.xi) / wn,
        shift: motion.omega.cross(&motion.xi) / (wn * wn),
        omega_norm: wn,
    })
}

impl MozziChaslesFrame {
    /// The same frame composed with a rotation by `angle` about `e_1` (still
    /// an admissible Mozzi–Chasles frame).
    pub fn spun(&self, angle: f64) -> Self {
        Self { m: crate::rot_e1(angle) * self.m, ..*self }
    }

    /// `y = M(x − shift)`.
    pub fn to_frame(&self, x: &Vec3) -> Vec3 {
        self.m * (x - self.shift)
    }

    pub fn from_frame(&self, y: &Vec3) -> Vec3 {
        self.m.transpose() * y + self.shift
    }
}

/// Proper rotation `R` with `R a = b` for unit vectors (Rodrigues).
fn rotation_onto(a: &Vec3, b: &Vec3) -> Mat3 {
    let v = a.cross(b);
    let c = a.dot(b);
    if c > -1.0 + 1e-12 {
        let k = Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0);
        Mat3::identity() + k + k * k / (1.0 + c)
    } else {
        // antiparallel: rotate by π about any axis orthogonal to a
        let p = if a.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
        let u = (p - a * a.dot(&p)).normalize();
        2.0 * u * u.transpose() - Mat3::identity()
    }
}
