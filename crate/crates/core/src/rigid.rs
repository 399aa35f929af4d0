use crate::Vec3;

/// Rigid velocity `V(x) = ξ + ω×x` of the body.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RigidMotion {
    pub xi: Vec3,
    pub omega: Vec3,
}

impl RigidMotion {
    pub fn new(xi: Vec3, omega: Vec3) -> Self {
        Self { xi, omega }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn translation(xi: Vec3) -> Self {
        Self::new(xi, Vec3::zeros())
    }

    /// `V(x) = ξ + ω×x`.
    #[inline]
    pub fn velocity(&self, x: &Vec3) -> Vec3 {
        self.xi + self.omega.cross(x)
    }

    pub fn is_zero(&self) -> bool {
        self.xi == Vec3::zeros() && self.omega == Vec3::zeros()
    }

    /// `|ξ| + |ω|`, the size used for relative residual scales.
    pub fn magnitude(&self) -> f64 {
        self.xi.norm() + self.omega.norm()
    }

    /// The motion seen in a frame rotated by the orthogonal matrix `q`.
    pub fn rotated(&self, q: &crate::Mat3) -> Self {
        Self::new(q * self.xi, q * self.omega)
    }
}

/// Free-function form of [`RigidMotion::velocity`].
pub fn rigid_velocity(motion: &RigidMotion, x: &Vec3) -> Vec3 {
    motion.velocity(x)
}
