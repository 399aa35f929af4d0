#![allow(dead_code)]

use std::sync::OnceLock;

use selfprop_core::{BodyGeometry, RigidMotion, Surface, TraceField, TraceKind, Vec3};
use selfprop_fem::Discretization;

/// Level-1 icosphere with Γ = {x₁ > 0.2}, far radius 8, h = 0.5.
pub fn sphere() -> &'static Discretization {
    static D: OnceLock<Discretization> = OnceLock::new();
    D.get_or_init(|| {
        let body = BodyGeometry::new(Surface::icosphere(1, 1.0).with_gamma(|x| x.x > 0.2)).unwrap();
        Discretization::new(&body, 8.0, 0.5).unwrap()
    })
}

/// Same body with the far sphere at radius 12 (the regression fixture).
pub fn fixture() -> &'static Discretization {
    static D: OnceLock<Discretization> = OnceLock::new();
    D.get_or_init(|| {
        let body = BodyGeometry::new(Surface::icosphere(1, 1.0).with_gamma(|x| x.x > 0.2)).unwrap();
        Discretization::new(&body, 12.0, 0.5).unwrap()
    })
}

pub fn swim() -> RigidMotion {
    RigidMotion::translation(Vec3::new(0.05, 0.0, 0.0))
}

pub fn spin() -> RigidMotion {
    RigidMotion::new(Vec3::new(0.05, 0.0, 0.0), Vec3::new(0.0, 0.02, 0.01))
}

/// Smooth admissible field of the given kind with coefficients from `c`.
pub fn smooth_control(d: &Discretization, kind: TraceKind, c: [f64; 6], amp: f64) -> TraceField {
    let raw = d.surface.sample(|x| {
        Vec3::new(c[0] + c[1] * x.y, c[2] + c[3] * x.z * x.x, c[4] + c[5] * x.x) + Vec3::new(c[5], c[3], c[1]).cross(x)
    });
    d.surface.constrain(&raw, kind).scaled(amp)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
