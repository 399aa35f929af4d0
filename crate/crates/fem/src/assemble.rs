//! Assembly of the generalized Oseen saddle-point matrix and of the volume
//! forms used by the nonlinear and adjoint solvers.
//!
//! Velocity rows realize, for a test field φ,
//!
//! ```text
//! a(u,φ) = 2(D u, D φ) − (p, div φ) + ((V·∇φ), u) − ((ω×φ), u)
//! ```
//!
//! which for zero-trace φ equals `2(Du,Dφ) − (p,div φ) − (V·∇u − ω×u, φ)`,
//! i.e. the weak form of `−div σ(u,p) − V·∇u + ω×u`. Putting the derivative
//! of the transport term on the test function keeps the boundary residual of
//! the discrete solution a consistent realization of `σ(u,p)n + (V·n)u`.
//! Continuity rows are `−(ψ, div u)`, so the Stokes part is symmetric.

use rayon::prelude::*;
use selfprop_core::quadrature::tet_deg5;
use selfprop_core::sparse::Csr;
use selfprop_core::{Mat3, RigidMotion, Vec3};

use crate::mesh::TetMesh;
use crate::space::{p2_grads, p2_values, MixedSpace, TetGeom};

const NL: usize = 34;
const CHUNK: usize = 512;

/// Assembled saddle-point matrix of the generalized Oseen operator.
#[derive(Debug, Clone)]
pub struct OseenOperator {
    pub motion: RigidMotion,
    pub k: Csr,
}

fn local_dofs(space: &MixedSpace, nodes: &[usize; 10]) -> [usize; NL] {
    let mut d = [0usize; NL];
    for a in 0..10 {
        for c in 0..3 {
            d[3 * a + c] = 3 * nodes[a] + c;
        }
    }
    for k in 0..4 {
        d[30 + k] = space.pressure_dof(nodes[k]);
    }
    d
}

/// Sparsity pattern of the mixed system (velocity–velocity, velocity–pressure
/// and pressure–velocity blocks).
fn pattern(space: &MixedSpace) -> (Vec<usize>, Vec<usize>) {
    let nn = space.n_nodes();
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); nn];
    for t in &space.tet_nodes {
        for &a in t {
            adj[a].extend(t.iter().map(|&b| b as u32));
        }
    }
    adj.par_iter_mut().for_each(|v| {
        v.sort_unstable();
        v.dedup();
    });
    let n = space.n_dofs();
    let np = space.n_points;
    let mut indptr = Vec::with_capacity(n + 1);
    indptr.push(0usize);
    let mut indices = Vec::new();
    for a in 0..nn {
        for _c in 0..3 {
            for &b in &adj[a] {
                let b = b as usize;
                indices.extend_from_slice(&[3 * b, 3 * b + 1, 3 * b + 2]);
            }
            for &b in &adj[a] {
                if (b as usize) < np {
                    indices.push(space.pressure_dof(b as usize));
                }
            }
            indptr.push(indices.len());
        }
    }
    for v in 0..np {
        for &b in &adj[v] {
            let b = b as usize;
            indices.extend_from_slice(&[3 * b, 3 * b + 1, 3 * b + 2]);
        }
        indptr.push(indices.len());
    }
    (indptr, indices)
}

/// Element matrix for the local ordering `3a + c` (velocity), `30 + k`
/// (pressure).
fn element_matrix(p: &[Vec3; 4], motion: &RigidMotion, stokes_only: bool) -> Box<[[f64; NL]; NL]> {
    let g = TetGeom::new(p);
    let mut m = Box::new([[0.0; NL]; NL]);
    // wc[c] = ω × e_c
    let wc = [0, 1, 2].map(|c| motion.omega.cross(&Vec3::ith(c, 1.0)));
    for q in tet_deg5() {
        let w = q.weight * g.vol;
        let phi = p2_values(&q.bary);
        let gr = p2_grads(&q.bary, &g);
        let x = q.bary[0] * p[0] + q.bary[1] * p[1] + q.bary[2] * p[2] + q.bary[3] * p[3];
        let vel = motion.velocity(&x);
        for a in 0..10 {
            let vga = vel.dot(&gr[a]);
            for b in 0..10 {
                let gg = w * gr[a].dot(&gr[b]);
                let tr = if stokes_only { 0.0 } else { w * vga * phi[b] };
                let pp = if stokes_only { 0.0 } else { w * phi[a] * phi[b] };
                for c in 0..3 {
                    for d in 0..3 {
                        let mut v = w * gr[b][c] * gr[a][d] - pp * wc[c][d];
                        if c == d {
                            v += gg + tr;
                        }
                        m[3 * a + c][3 * b + d] += v;
                    }
                }
            }
            for k in 0..4 {
                for c in 0..3 {
                    let v = -w * q.bary[k] * gr[a][c];
                    m[3 * a + c][30 + k] += v;
                    m[30 + k][3 * a + c] += v;
                }
            }
        }
    }
    m
}

fn assemble_matrix(mesh: &TetMesh, space: &MixedSpace, motion: &RigidMotion, stokes_only: bool) -> Csr {
    let (indptr, indices) = pattern(space);
    let mut values = vec![0.0; indices.len()];
    let n = space.n_dofs();
    for (ci, chunk) in mesh.tets.chunks(CHUNK).enumerate() {
        let mats: Vec<_> = chunk
            .par_iter()
            .enumerate()
            .map(|(j, _)| element_matrix(&mesh.corners(ci * CHUNK + j), motion, stokes_only))
            .collect();
        for (j, m) in mats.iter().enumerate() {
            let d = local_dofs(space, &space.tet_nodes[ci * CHUNK + j]);
            for r in 0..NL {
                let row = &indices[indptr[d[r]]..indptr[d[r] + 1]];
                let base = indptr[d[r]];
                for c in 0..NL {
                    if m[r][c] == 0.0 {
                        continue;
                    }
                    let pos = row.binary_search(&d[c]).expect("entry outside the sparsity pattern");
                    values[base + pos] += m[r][c];
                }
            }
        }
    }
    Csr { nrows: n, ncols: n, indptr, indices, values }
}

/// Assembles the saddle-point matrix for the motion `(ξ, ω)`.
pub fn assemble_oseen(mesh: &TetMesh, space: &MixedSpace, motion: &RigidMotion) -> OseenOperator {
    OseenOperator { motion: *motion, k: assemble_matrix(mesh, space, motion, false) }
}

/// Stokes saddle-point matrix (`2(Du,Dφ)`, divergence coupling only).
pub fn assemble_stokes(mesh: &TetMesh, space: &MixedSpace) -> Csr {
    assemble_matrix(mesh, space, &RigidMotion::zero(), true)
}

/// Local velocity values of a full vector on a cell.
#[inline]
pub fn cell_velocity(space: &MixedSpace, x: &[f64], nodes: &[usize; 10]) -> [Vec3; 10] {
    nodes.map(|n| space.velocity(x, n))
}

/// Volume form evaluated cell by cell into the velocity rows. `f` receives
/// the cell, the quadrature weight, values and gradients of the basis, and
/// accumulates into the 30 local velocity rows.
pub fn assemble_velocity_form<F>(mesh: &TetMesh, space: &MixedSpace, f: F) -> Vec<f64>
where
    F: Fn(usize, &QpData, &mut [f64; 30]) + Sync,
{
    let mut out = vec![0.0; space.n_dofs()];
    for (ci, chunk) in mesh.tets.chunks(CHUNK).enumerate() {
        let locals: Vec<[f64; 30]> = (0..chunk.len())
            .into_par_iter()
            .map(|j| {
                let t = ci * CHUNK + j;
                let p = mesh.corners(t);
                let g = TetGeom::new(&p);
                let mut loc = [0.0; 30];
                for q in tet_deg5() {
                    let x = q.bary[0] * p[0] + q.bary[1] * p[1] + q.bary[2] * p[2] + q.bary[3] * p[3];
                    let qd = QpData { w: q.weight * g.vol, x, bary: q.bary, phi: p2_values(&q.bary), grad: p2_grads(&q.bary, &g) };
                    f(t, &qd, &mut loc);
                }
                loc
            })
            .collect();
        for (j, loc) in locals.iter().enumerate() {
            let nodes = &space.tet_nodes[ci * CHUNK + j];
            for a in 0..10 {
                for c in 0..3 {
                    out[3 * nodes[a] + c] += loc[3 * a + c];
                }
            }
        }
    }
    out
}

/// Quadrature-point data handed to volume forms.
pub struct QpData {
    pub w: f64,
    pub x: Vec3,
    pub bary: [f64; 4],
    pub phi: [f64; 10],
    pub grad: [Vec3; 10],
}

impl QpData {
    #[inline]
    pub fn value(&self, u: &[Vec3; 10]) -> Vec3 {
        (0..10).fold(Vec3::zeros(), |s, a| s + self.phi[a] * u[a])
    }

    /// `∇u` with `(∇u)_{ij} = ∂_j u_i`.
    #[inline]
    pub fn gradient(&self, u: &[Vec3; 10]) -> Mat3 {
        (0..10).fold(Mat3::zeros(), |s, a| s + u[a] * self.grad[a].transpose())
    }
}

/// `((a·∇φ), b)` for every velocity test function φ: the divergence form of
/// `−(a·∇b, φ)` for solenoidal `a`.
pub fn convection_vector(mesh: &TetMesh, space: &MixedSpace, a: &[f64], b: &[f64]) -> Vec<f64> {
    assemble_velocity_form(mesh, space, |t, q, loc| {
        let nodes = &space.tet_nodes[t];
        let av = q.value(&cell_velocity(space, a, nodes));
        let bv = q.value(&cell_velocity(space, b, nodes));
        for i in 0..10 {
            let s = q.w * av.dot(&q.grad[i]);
            for c in 0..3 {
                loc[3 * i + c] += s * bv[c];
            }
        }
    })
}

/// `(v̂·∇u + (∇u)ᵀ v̂, φ)` for every velocity test function φ.
pub fn frak_vector(mesh: &TetMesh, space: &MixedSpace, vhat: &[f64], u: &[f64]) -> Vec<f64> {
    assemble_velocity_form(mesh, space, |t, q, loc| {
        let nodes = &space.tet_nodes[t];
        let v = q.value(&cell_velocity(space, vhat, nodes));
        let gu = q.gradient(&cell_velocity(space, u, nodes));
        let f = gu * v + gu.transpose() * v;
        for i in 0..10 {
            for c in 0..3 {
                loc[3 * i + c] += q.w * q.phi[i] * f[c];
            }
        }
    })
}

/// `(f, φ)` for a volume forcing given pointwise.
pub fn load_vector(mesh: &TetMesh, space: &MixedSpace, f: impl Fn(&Vec3) -> Vec3 + Sync) -> Vec<f64> {
    assemble_velocity_form(mesh, space, |_, q, loc| {
        let fv = f(&q.x);
        for i in 0..10 {
            for c in 0..3 {
                loc[3 * i + c] += q.w * q.phi[i] * fv[c];
            }
        }
    })
}

/// Velocity rows of the Stokes action `2(Du, Dφ) − (p, div φ)`.
pub fn stokes_action(mesh: &TetMesh, space: &MixedSpace, x: &[f64]) -> Vec<f64> {
    let off = 3 * space.n_nodes();
    assemble_velocity_form(mesh, space, |t, q, loc| {
        let nodes = &space.tet_nodes[t];
        let gu = q.gradient(&cell_velocity(space, x, nodes));
        let p: f64 = (0..4).map(|k| x[off + nodes[k]] * q.bary[k]).sum();
        let d2 = gu + gu.transpose();
        for i in 0..10 {
            let r = d2 * q.grad[i] - p * q.grad[i];
            for c in 0..3 {
                loc[3 * i + c] += q.w * r[c];
            }
        }
    })
}

/// Deformation energy `2‖D(u)‖²` of the velocity part of `x`.
pub fn deformation_energy(mesh: &TetMesh, space: &MixedSpace, x: &[f64]) -> f64 {
    (0..mesh.n_tets())
        .into_par_iter()
        .map(|t| {
            let p = mesh.corners(t);
            let g = TetGeom::new(&p);
            let u = cell_velocity(space, x, &space.tet_nodes[t]);
            let mut s = 0.0;
            for q in tet_deg5() {
                let gr = p2_grads(&q.bary, &g);
                let gu = (0..10).fold(Mat3::zeros(), |m, a| m + u[a] * gr[a].transpose());
                let d = 0.5 * (gu + gu.transpose());
                s += q.weight * g.vol * 2.0 * d.norm_squared();
            }
            s
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum()
}
