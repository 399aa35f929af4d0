//! Norms and integrals of discrete fields over the truncated domain.

use rayon::prelude::*;
use selfprop_core::quadrature::tet_deg7;
use selfprop_core::{Mat3, Vec3, WeightFn};

use crate::mesh::TetMesh;
use crate::space::{p2_grads, p2_hessians, p2_values, MixedSpace, TetGeom};

/// The norm list of the a-priori estimates, evaluated on a discrete pair.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FunctionalNorms {
    pub grad_l2: f64,
    /// Broken (cellwise) `‖∇²u‖₂`.
    pub hess_l2: f64,
    pub l2: f64,
    pub linf: f64,
    pub p_l2: f64,
    /// `max ϖ|u|` over quadrature points.
    pub weighted_sup: f64,
    /// Flux `∮ n·u` through the body (n into the body).
    pub flux: f64,
}

/// Cell-by-cell sum of `f(x, u, ∇u, p) · w` over a degree-7 rule.
pub fn integrate<F>(mesh: &TetMesh, space: &MixedSpace, x: &[f64], f: F) -> f64
where
    F: Fn(&Vec3, &Vec3, &Mat3, f64) -> f64 + Sync,
{
    let off = 3 * space.n_nodes();
    let parts: Vec<f64> = (0..mesh.n_tets())
        .into_par_iter()
        .map(|t| {
            let p = mesh.corners(t);
            let g = TetGeom::new(&p);
            let nodes = &space.tet_nodes[t];
            let u: [Vec3; 10] = nodes.map(|n| space.velocity(x, n));
            let mut s = 0.0;
            for q in tet_deg7() {
                let phi = p2_values(&q.bary);
                let gr = p2_grads(&q.bary, &g);
                let xq = q.bary[0] * p[0] + q.bary[1] * p[1] + q.bary[2] * p[2] + q.bary[3] * p[3];
                let uq = (0..10).fold(Vec3::zeros(), |a, i| a + phi[i] * u[i]);
                let gq = (0..10).fold(Mat3::zeros(), |a, i| a + u[i] * gr[i].transpose());
                let pq: f64 = (0..4).map(|k| q.bary[k] * x[off + nodes[k]]).sum();
                s += q.weight * g.vol * f(&xq, &uq, &gq, pq);
            }
            s
        })
        .collect();
    parts.iter().sum()
}

/// Maximum of `f(x, u)` over degree-7 quadrature points and the nodes.
pub fn sup<F>(mesh: &TetMesh, space: &MixedSpace, x: &[f64], f: F) -> f64
where
    F: Fn(&Vec3, &Vec3) -> f64 + Sync,
{
    let at_qp = (0..mesh.n_tets())
        .into_par_iter()
        .map(|t| {
            let p = mesh.corners(t);
            let u: [Vec3; 10] = space.tet_nodes[t].map(|n| space.velocity(x, n));
            tet_deg7()
                .iter()
                .map(|q| {
                    let phi = p2_values(&q.bary);
                    let xq = q.bary[0] * p[0] + q.bary[1] * p[1] + q.bary[2] * p[2] + q.bary[3] * p[3];
                    let uq = (0..10).fold(Vec3::zeros(), |a, i| a + phi[i] * u[i]);
                    f(&xq, &uq)
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    let at_nodes = (0..space.n_nodes()).map(|n| f(&space.node_pos[n], &space.velocity(x, n))).fold(0.0, f64::max);
    at_qp.max(at_nodes)
}

/// Broken `‖∇²u‖₂²`.
fn hessian_sq(mesh: &TetMesh, space: &MixedSpace, x: &[f64]) -> f64 {
    (0..mesh.n_tets())
        .into_par_iter()
        .map(|t| {
            let g = TetGeom::new(&mesh.corners(t));
            let h = p2_hessians(&g);
            let u: [Vec3; 10] = space.tet_nodes[t].map(|n| space.velocity(x, n));
            let mut s = 0.0;
            for c in 0..3 {
                let hc = (0..10).fold(Mat3::zeros(), |a, i| a + u[i][c] * h[i]);
                s += hc.norm_squared();
            }
            s * g.vol
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum()
}

/// All norms of the estimate list. `body_flux` is the flux of the body
/// trace, computed by the caller on the surface space.
pub fn functional_norms(mesh: &TetMesh, space: &MixedSpace, x: &[f64], weight: &WeightFn, body_flux: f64) -> FunctionalNorms {
    let grad = integrate(mesh, space, x, |_, _, g, _| g.norm_squared());
    let l2 = integrate(mesh, space, x, |_, u, _, _| u.norm_squared());
    let p2 = integrate(mesh, space, x, |_, _, _, p| p * p);
    FunctionalNorms {
        grad_l2: grad.sqrt(),
        hess_l2: hessian_sq(mesh, space, x).sqrt(),
        l2: l2.sqrt(),
        linf: sup(mesh, space, x, |_, u| u.norm()),
        p_l2: p2.sqrt(),
        weighted_sup: sup(mesh, space, x, |xq, u| weight.eval(xq) * u.norm()),
        flux: body_flux,
    }
}

/// `‖∇u‖₂` of the velocity part.
pub fn grad_norm(mesh: &TetMesh, space: &MixedSpace, x: &[f64]) -> f64 {
    integrate(mesh, space, x, |_, _, g, _| g.norm_squared()).sqrt()
}
