//! Boundary quadrature helpers on the body surface.
//!
//! Two normal rules coexist. Products `(a·n) b` coming from the momentum
//! balance and the drag use the nodal rule `(a·n)_h` (nodal products
//! interpolated), so nodally tangential traces carry no flux there. Terms
//! produced by integrating the transport by parts use the exact face
//! normals, which is what the volume forms see.

use selfprop_core::{rigid_basis, RigidMotion, SurfaceSpace, Vec3};

/// Values of a nodal trace at the boundary quadrature points.
pub fn at_qps(s: &SurfaceSpace, v: &[Vec3]) -> Vec<Vec3> {
    s.qps().iter().map(|q| s.interp(v, q)).collect()
}

/// `(v·n)_h` at the quadrature points.
pub fn normal_h(s: &SurfaceSpace, v: &[Vec3]) -> Vec<f64> {
    let vn = s.normal_component(v);
    s.qps().iter().map(|q| s.interp_scalar(&vn, q)).collect()
}

/// `v·n_f` at the quadrature points, with the face normal.
pub fn normal_f(s: &SurfaceSpace, v: &[Vec3]) -> Vec<f64> {
    s.qps().iter().map(|q| s.interp(v, q).dot(&s.face_normals[q.face])).collect()
}

pub fn rigid_at_qps(s: &SurfaceSpace, m: &RigidMotion) -> Vec<Vec3> {
    s.qps().iter().map(|q| m.velocity(&q.x)).collect()
}

/// Nodal traces of the six rigid motions `e_k`, `e_k × x`.
pub fn rigid_traces(s: &SurfaceSpace) -> Vec<Vec<Vec3>> {
    (0..6).map(|k| s.sample(|x| rigid_basis(k, x))).collect()
}

/// `∮ g` over the quadrature values.
pub fn integral(s: &SurfaceSpace, g: &[Vec3]) -> Vec3 {
    s.qps().iter().zip(g).fold(Vec3::zeros(), |a, (q, v)| a + q.w * v)
}

/// `∮ x × g`.
pub fn moment(s: &SurfaceSpace, g: &[Vec3]) -> Vec3 {
    s.qps().iter().zip(g).fold(Vec3::zeros(), |a, (q, v)| a + q.w * q.x.cross(v))
}

/// `∮ g·W_k` for the six rigid traces, as (force, torque) components.
pub fn rigid_pairings(s: &SurfaceSpace, g: &[Vec3]) -> [f64; 6] {
    let f = integral(s, g);
    let t = moment(s, g);
    [f.x, f.y, f.z, t.x, t.y, t.z]
}

/// Nodal functional `∮ g φ_a` of quadrature values.
pub fn functional(s: &SurfaceSpace, g: &[Vec3]) -> Vec<Vec3> {
    let mut out = vec![Vec3::zeros(); s.n_nodes()];
    for (q, v) in s.qps().iter().zip(g) {
        let f = &s.faces[q.face];
        for i in 0..6 {
            out[f[i]] += (q.w * q.phi[i]) * v;
        }
    }
    out
}

/// Nodal functional of `δ ↦ ∮ (δ·n)_h f`: `n_a ∮ f φ_a`.
pub fn normal_functional(s: &SurfaceSpace, f: &[f64]) -> Vec<Vec3> {
    let mut w = vec![0.0; s.n_nodes()];
    for (q, v) in s.qps().iter().zip(f) {
        let face = &s.faces[q.face];
        for i in 0..6 {
            w[face[i]] += q.w * q.phi[i] * v;
        }
    }
    w.iter().zip(&s.node_normals).map(|(a, n)| *a * n).collect()
}

/// Nodal functional of `δ ↦ ∮ (δ·n_f) f`.
pub fn face_normal_functional(s: &SurfaceSpace, f: &[f64]) -> Vec<Vec3> {
    let g: Vec<Vec3> = s.qps().iter().zip(f).map(|(q, v)| *v * s.face_normals[q.face]).collect();
    functional(s, &g)
}

/// `Σ_a F_a·δ_a`.
pub fn apply(functional: &[Vec3], trace: &[Vec3]) -> f64 {
    functional.iter().zip(trace).map(|(a, b)| a.dot(b)).sum()
}

pub fn axpy(y: &mut [Vec3], a: f64, x: &[Vec3]) {
    y.iter_mut().zip(x).for_each(|(u, v)| *u += a * v);
}

pub fn add(a: &[Vec3], b: &[Vec3]) -> Vec<Vec3> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn axpy_vec(y: &mut [f64], a: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(u, v)| *u += a * v);
}
