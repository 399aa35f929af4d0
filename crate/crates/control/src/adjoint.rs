//! Adjoint system, boundary multiplier and drag gradient.

use nalgebra::Vector6;
use selfprop_core::sparse::{cg, Csr};
use selfprop_core::{TraceField, TraceKind, Vec3};
use selfprop_fem::assemble::{assemble_stokes, frak_vector, stokes_action};
use selfprop_fem::space::{p2_grads, p2_values, TetGeom};
use selfprop_fem::{Discretization, MixedSpace, TetMesh};

use crate::state::{FlowState, Problem};
use crate::surf::{self, add, apply, at_qps, normal_f, normal_h};
use crate::{ControlError, Result};

/// Adjoint pair `(û, q̂)` with its rigid trace `ℓ + k×x` and multiplier.
#[derive(Debug, Clone)]
pub struct AdjointState {
    pub y: Vec<f64>,
    /// `(ℓ, k)` stacked.
    pub mu: Vector6<f64>,
    /// `ζ̂ = σ(v̂ − û, p̂ − q̂)n` as an L² density.
    pub zeta: TraceField,
    /// Nodal functional `δ ↦ ζ̂(Tδ)` including the far extension.
    pub zeta_functional: Vec<Vec3>,
    pub increments: Vec<f64>,
}

impl AdjointState {
    pub fn ell(&self) -> Vec3 {
        Vec3::new(self.mu[0], self.mu[1], self.mu[2])
    }

    pub fn k(&self) -> Vec3 {
        Vec3::new(self.mu[3], self.mu[4], self.mu[5])
    }
}

/// `𝔉(u) = v̂·∇u + (∇u)ᵀ v̂` with its norms.
#[derive(Debug, Clone)]
pub struct FrakField {
    /// `(𝔉(u), φ)` on the velocity rows.
    pub load: Vec<f64>,
    pub l2: f64,
    /// Dual norm against the zero-trace inner product `2(D·, D·)`.
    pub dual: f64,
}

fn frak_l2(mesh: &TetMesh, space: &MixedSpace, vhat: &[f64], u: &[f64]) -> f64 {
    use rayon::prelude::*;
    let s: f64 = (0..mesh.n_tets())
        .into_par_iter()
        .map(|t| {
            let p = mesh.corners(t);
            let g = TetGeom::new(&p);
            let nodes = &space.tet_nodes[t];
            let (a, b) = (nodes.map(|n| space.velocity(vhat, n)), nodes.map(|n| space.velocity(u, n)));
            selfprop_core::quadrature::tet_deg7()
                .iter()
                .map(|q| {
                    let phi = p2_values(&q.bary);
                    let gr = p2_grads(&q.bary, &g);
                    let v = (0..10).fold(Vec3::zeros(), |s, i| s + phi[i] * a[i]);
                    let gu = (0..10).fold(selfprop_core::Mat3::zeros(), |s, i| s + b[i] * gr[i].transpose());
                    q.weight * g.vol * (gu * v + gu.transpose() * v).norm_squared()
                })
                .sum::<f64>()
        })
        .sum();
    s.sqrt()
}

/// Dual norm of a velocity functional on zero-trace fields:
/// `sup ℓ(φ) / (2‖Dφ‖²)^{1/2}`.
pub fn h1_dual_norm(disc: &Discretization, load: &[f64]) -> f64 {
    let space = &disc.space;
    let k = assemble_stokes(disc.mesh(), space);
    let free: Vec<usize> = (0..space.n_velocity()).filter(|&d| !space.is_boundary_dof(d)).collect();
    let mut pos = vec![usize::MAX; space.n_dofs()];
    for (i, &d) in free.iter().enumerate() {
        pos[d] = i;
    }
    let mut trip = Vec::new();
    for (i, &r) in free.iter().enumerate() {
        let (cols, vals) = k.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            if pos[c] != usize::MAX {
                trip.push((i, pos[c], v));
            }
        }
    }
    let a = Csr::from_triplets(free.len(), free.len(), trip);
    let b: Vec<f64> = free.iter().map(|&d| load[d]).collect();
    let (x, _) = cg(&a, &b, 1e-12, 20_000);
    surf::dot(&x, &b).max(0.0).sqrt()
}

/// `𝔉(u)` for the frozen state velocity `v̂`.
pub fn mapping_f(disc: &Discretization, vhat: &[f64], u: &[f64]) -> FrakField {
    let load = frak_vector(disc.mesh(), &disc.space, vhat, u);
    let l2 = frak_l2(disc.mesh(), &disc.space, vhat, u);
    let dual = h1_dual_norm(disc, &load);
    log::debug!("𝔉: L² norm {l2:.3e}, dual norm {dual:.3e}");
    FrakField { load, l2, dual }
}

impl Problem<'_> {
    /// Nodal functional of `δ ↦ h(δ; û)`, the boundary part of the gradient
    /// for the adjoint trace `û`.
    pub(crate) fn boundary_gradient(&self, st: &FlowState, u: &[Vec3]) -> Vec<Vec3> {
        let s = self.surface();
        let vs = st.v_s();
        let w = at_qps(s, &add(&self.rigid_trace(), &vs));
        let uq = at_qps(s, u);
        let (sh, sf) = (normal_h(s, &vs), normal_f(s, &vs));
        let om = self.motion().omega;
        let nrm: Vec<f64> =
            s.qps().iter().enumerate().map(|(i, q)| 0.25 * w[i].norm_squared() + om.cross(&q.x).dot(&uq[i]) + w[i].dot(&uq[i])).collect();
        let vec: Vec<Vec3> = (0..w.len()).map(|i| 0.5 * sh[i] * w[i] + (sh[i] - sf[i]) * uq[i]).collect();
        let fac: Vec<f64> = (0..w.len()).map(|i| -w[i].dot(&uq[i])).collect();
        let mut f = surf::normal_functional(s, &nrm);
        surf::axpy(&mut f, 1.0, &surf::functional(s, &vec));
        surf::axpy(&mut f, 1.0, &surf::face_normal_functional(s, &fac));
        f
    }

    fn adjoint_load(&self, st: &FlowState, y: &[f64]) -> Vec<f64> {
        let (mesh, space) = (self.disc.mesh(), &self.disc.space);
        let mut load = stokes_action(mesh, space, &st.x);
        surf::axpy_vec(&mut load, 1.0, &frak_vector(mesh, space, &st.x, y));
        load
    }

    /// `ζ = Stokes(x̂) + 𝔉(y) − Kᵀy` on the boundary rows.
    fn multiplier_rows(&self, y: &[f64], load: &[f64]) -> Vec<f64> {
        let mut r = self.solver.residual_transpose(y, load);
        for (d, v) in r.iter_mut().enumerate() {
            *v = if self.disc.space.is_boundary_dof(d) { -*v } else { 0.0 };
        }
        r
    }

    /// Fixed-point iteration for the adjoint system with the corrector
    /// closure.
    pub fn solve_adjoint(&self, st: &FlowState) -> Result<AdjointState> {
        let d = self.disc;
        let zero = d.zeros();
        let scale = self.scale(&st.v_star);
        let mut y = d.zeros();
        let mut mu = Vector6::zeros();
        let mut increments: Vec<f64> = Vec::new();
        let mut streak = 0;
        loop {
            let load = self.adjoint_load(st, &y);
            let uf = self.solver.solve_transpose(&zero, &load)?;
            let pf = d.far.pull_back(&d.space, &self.multiplier_rows(&uf, &load));
            let hf = self.boundary_gradient(st, &d.space.body_trace(&y));
            let rhs = Vector6::from_fn(|j, _| apply(&pf, &self.basis.fields[j].values) + apply(&hf, &self.basis.fields[j].values));
            let m = self.basis.solve(&rhs);
            let mut yn = uf;
            for (k, b) in self.basis.basic.iter().enumerate() {
                surf::axpy_vec(&mut yn, m[k], b);
            }
            let dy: Vec<f64> = yn.iter().zip(&y).map(|(a, b)| a - b).collect();
            let inc = self.metric(&dy, &(m - mu));
            if let Some(&prev) = increments.last() {
                streak = if prev > 0.0 && inc >= prev { streak + 1 } else { 0 };
            }
            increments.push(inc);
            y = yn;
            mu = m;
            log::debug!("adjoint iteration {}: increment {inc:.3e}", increments.len());
            if inc <= self.opts.tol * scale {
                break;
            }
            if streak >= 3 {
                return Err(ControlError::NonContraction { what: "adjoint iteration", ratios: increments });
            }
            if increments.len() >= self.opts.max_iter {
                return Err(ControlError::MaxIterations { what: "adjoint iteration", iterations: increments.len(), last: inc });
            }
        }
        let rows = self.multiplier_rows(&y, &self.adjoint_load(st, &y));
        let zeta = TraceField::new(d.surface.mass_solve(&d.space.body_functional(&rows)), TraceKind::General);
        let zeta_functional = d.far.pull_back(&d.space, &rows);
        Ok(AdjointState { y, mu, zeta, zeta_functional, increments })
    }

    /// Multiplier `ζ̂ = σ(v̂ − û, p̂ − q̂)n`.
    pub fn multiplier(&self, adj: &AdjointState) -> TraceField {
        adj.zeta.clone()
    }

    /// Closure values `ζ̂(T b_j) + h(b_j; û)` for the six corrector fields;
    /// zero at a converged adjoint.
    pub fn closure_residuals(&self, st: &FlowState, adj: &AdjointState) -> [f64; 6] {
        let g = self.gradient_functional(st, adj);
        std::array::from_fn(|j| apply(&g, &self.basis.fields[j].values))
    }

    /// Nodal functional `G` with `½ DJ(v_*)δ = Σ_a G_a·δ_a` for admissible δ.
    pub fn gradient_functional(&self, st: &FlowState, adj: &AdjointState) -> Vec<Vec3> {
        let mut g = adj.zeta_functional.clone();
        let u = self.disc.space.body_trace(&adj.y);
        surf::axpy(&mut g, 1.0, &self.boundary_gradient(st, &u));
        g
    }

    /// L² gradient density `G` of the control kind: `∮ G·δ = ½ DJ δ` for
    /// every admissible δ, with G itself admissible.
    pub fn gradient(&self, st: &FlowState, adj: &AdjointState) -> TraceField {
        constrained_density(self.surface(), &self.gradient_functional(st, adj), self.kind())
    }
}

/// Density `G` of the kind with `∮ G·δ = F(δ)` for all admissible δ: the
/// boundary mass matrix restricted to the admissible subspace.
pub fn constrained_density(s: &selfprop_core::SurfaceSpace, f: &[Vec3], kind: TraceKind) -> TraceField {
    let nn = s.n_nodes();
    match kind {
        TraceKind::General => TraceField::new(s.mass_solve(f), kind),
        TraceKind::Localized => {
            let free: Vec<usize> = (0..nn).filter(|&i| s.patch_free[i]).collect();
            let mut pos = vec![usize::MAX; nn];
            for (k, &i) in free.iter().enumerate() {
                pos[i] = k;
            }
            let mut trip = Vec::new();
            for (k, &i) in free.iter().enumerate() {
                let (cols, vals) = s.mass.row(i);
                for (&c, &v) in cols.iter().zip(vals) {
                    if pos[c] != usize::MAX {
                        trip.push((k, pos[c], v));
                    }
                }
            }
            let m = Csr::from_triplets(free.len(), free.len(), trip);
            let mut out = vec![Vec3::zeros(); nn];
            for c in 0..3 {
                let b: Vec<f64> = free.iter().map(|&i| f[i][c]).collect();
                let (x, _) = cg(&m, &b, 1e-15, 4000);
                for (k, &i) in free.iter().enumerate() {
                    out[i][c] = x[k];
                }
            }
            TraceField::new(out, kind)
        }
        TraceKind::Tangential => {
            // mass matrix in the 2N tangent coordinates
            let t = &s.tangents;
            let mut trip = Vec::new();
            for a in 0..nn {
                let (cols, vals) = s.mass.row(a);
                for (&b, &v) in cols.iter().zip(vals) {
                    for i in 0..2 {
                        for j in 0..2 {
                            trip.push((2 * a + i, 2 * b + j, v * t[a][i].dot(&t[b][j])));
                        }
                    }
                }
            }
            let m = Csr::from_triplets(2 * nn, 2 * nn, trip);
            let b: Vec<f64> = (0..2 * nn).map(|p| f[p / 2].dot(&t[p / 2][p % 2])).collect();
            let (x, _) = cg(&m, &b, 1e-15, 8000);
            TraceField::new((0..nn).map(|a| x[2 * a] * t[a][0] + x[2 * a + 1] * t[a][1]).collect(), kind)
        }
    }
}
