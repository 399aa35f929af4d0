//! The anisotropic weight ϖ measuring wake-type decay of exterior flows.

use crate::{RigidMotion, Vec3};

/// Below this `|ω|` the ω = 0 branch of the weight is used.
pub const OMEGA_BRANCH_EPS: f64 = 0.0;

/// Weight function ϖ attached to a rigid motion.
///
/// For ω ≠ 0 (with `c = ω×ξ/|ω|²`):
/// `ϖ(x) = (1 + |x − c|) (1 + 2 |ω·ξ|/|ω| s(x))`,
/// `s(x) = |x − c| + sign(ω·ξ) ω·x / |ω|`;
/// for ω = 0: `ϖ(x) = (1 + |x|)(1 + 2(|ξ||x| + ξ·x))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightFn {
    pub motion: RigidMotion,
}

impl WeightFn {
    pub fn new(motion: RigidMotion) -> Self {
        Self { motion }
    }

    /// Shift `ω×ξ/|ω|²` of the rotation axis (zero when ω = 0).
    pub fn shift(&self) -> Vec3 {
        let w2 = self.motion.omega.norm_squared();
        if w2 > OMEGA_BRANCH_EPS {
            self.motion.omega.cross(&self.motion.xi) / w2
        } else {
            Vec3::zeros()
        }
    }

    /// Wake function `s(x)`; only meaningful for ω ≠ 0.
    pub fn wake(&self, x: &Vec3) -> f64 {
        let om = &self.motion.omega;
        let wn = om.norm();
        let d = (x - self.shift()).norm();
        let sgn = sign(om.dot(&self.motion.xi));
        d + sgn * om.dot(x) / wn
    }

    pub fn eval(&self, x: &Vec3) -> f64 {
        let RigidMotion { xi, omega } = self.motion;
        let wn = omega.norm();
        if wn * wn > OMEGA_BRANCH_EPS {
            let d = (x - self.shift()).norm();
            (1.0 + d) * (1.0 + 2.0 * omega.dot(&xi).abs() / wn * self.wake(x))
        } else {
            let r = x.norm();
            (1.0 + r) * (1.0 + 2.0 * (xi.norm() * r + xi.dot(x)))
        }
    }
}

/// `sign` with `sign(0) = 0`.
fn sign(a: f64) -> f64 {
    if a > 0.0 {
        1.0
    } else if a < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Free-function form of [`WeightFn::eval`].
pub fn weight_eval(w: &WeightFn, x: &Vec3) -> f64 {
    w.eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let w = WeightFn::new(RigidMotion::zero());
        assert_eq!(w.eval(&Vec3::new(0.0, 3.0, 0.0)), 4.0);
        let w = WeightFn::new(RigidMotion::translation(Vec3::x()));
        assert_eq!(w.eval(&Vec3::new(-3.0, 0.0, 0.0)), 4.0);
        let w = WeightFn::new(RigidMotion::new(Vec3::x(), Vec3::x()));
        assert_eq!(w.shift(), Vec3::zeros());
        assert_eq!(w.eval(&Vec3::x()), 10.0);
    }
}
