//! Gâteaux derivative of the control-to-state map.

use nalgebra::Vector6;
use selfprop_core::{TraceField, Vec3};
use selfprop_fem::assemble::{convection_vector, stokes_action};
use selfprop_fem::FarRule;

use crate::state::{FlowState, Problem};
use crate::surf::{self, add, at_qps, normal_f, normal_h, rigid_at_qps};
use crate::{ControlError, Result};

/// Linearized state `(z, r, z_*^𝒞)` in the direction `δv_*`.
#[derive(Debug, Clone)]
pub struct LinearizedState {
    pub z: Vec<f64>,
    pub dc: Vector6<f64>,
    pub direction: TraceField,
    /// `z_*^𝒞 = Σ dc_j b_j`.
    pub z_star_c: TraceField,
    pub increments: Vec<f64>,
}

impl Problem<'_> {
    /// `lin_k(a)`: derivative of the boundary terms of the balance laws in
    /// the boundary direction `a`, paired with the six rigid traces.
    pub(crate) fn balance_derivative(&self, st: &FlowState, a: &[Vec3]) -> [f64; 6] {
        let s = self.surface();
        let vs = st.v_s();
        let vsq = at_qps(s, &vs);
        let big_v = rigid_at_qps(s, &self.motion());
        let aq = at_qps(s, a);
        let (ah, af) = (normal_h(s, a), normal_f(s, a));
        let (sh, sf) = (normal_h(s, &vs), normal_f(s, &vs));
        let g: Vec<Vec3> = s
            .qps()
            .iter()
            .enumerate()
            .map(|(i, q)| {
                let v = big_v[i] + vsq[i];
                ah[i] * (v + self.motion().omega.cross(&q.x)) + sh[i] * aq[i] - af[i] * v - sf[i] * aq[i]
            })
            .collect();
        surf::rigid_pairings(s, &g)
    }

    /// Solves the linearized state equations at `st` in the direction
    /// `delta` (same kind as the control).
    pub fn solve_linearized(&self, st: &FlowState, delta: &TraceField) -> Result<LinearizedState> {
        if delta.kind != self.kind() {
            return Err(ControlError::Invalid("direction and control are of different kinds".into()));
        }
        delta.check(self.surface())?;
        let d = self.disc;
        let (mesh, space) = (d.mesh(), &d.space);
        let mut z = d.zeros();
        let mut dc = Vector6::zeros();
        let mut increments: Vec<f64> = Vec::new();
        let mut streak = 0;
        loop {
            let load: Vec<f64> = convection_vector(mesh, space, &z, &st.x)
                .iter()
                .zip(convection_vector(mesh, space, &st.x, &z))
                .map(|(a, b)| a + b)
                .collect();
            let ds = add(&delta.values, &self.basis.combine(&dc));
            let lin = self.balance_derivative(st, &ds);
            let zf = d.solve_dirichlet(&self.solver, &delta.values, FarRule::FluxTemplate, &load)?;
            let pr = self.rigid_rows(&self.solver.residual(&zf, &load));
            let c = self.basis.solve_t(&Vector6::from_fn(|k, _| lin[k] - pr[k]));
            let mut zn = zf;
            for (j, l) in self.basis.lifts.iter().enumerate() {
                surf::axpy_vec(&mut zn, c[j], l);
            }
            let dz: Vec<f64> = zn.iter().zip(&z).map(|(a, b)| a - b).collect();
            let inc = self.metric(&dz, &(c - dc));
            let size = self.metric(&zn, &c);
            if let Some(&prev) = increments.last() {
                streak = if prev > 0.0 && inc >= prev { streak + 1 } else { 0 };
            }
            increments.push(inc);
            z = zn;
            dc = c;
            if inc <= self.opts.tol * size {
                break;
            }
            if streak >= 3 {
                return Err(ControlError::NonContraction { what: "linearized iteration", ratios: increments });
            }
            if increments.len() >= self.opts.max_iter {
                return Err(ControlError::MaxIterations { what: "linearized iteration", iterations: increments.len(), last: inc });
            }
        }
        let z_star_c = TraceField::new(self.basis.combine(&dc), self.kind());
        Ok(LinearizedState { z, dc, direction: delta.clone(), z_star_c, increments })
    }

    /// `DJ(v_*)δ` through the linearized state.
    pub fn drag_derivative(&self, st: &FlowState, lin: &LinearizedState) -> f64 {
        let s = self.surface();
        let mut v = st.x.clone();
        v[3 * self.disc.space.n_nodes()..].iter_mut().for_each(|p| *p = 0.0);
        let vol = 2.0 * surf::dot(&stokes_action(self.disc.mesh(), &self.disc.space, &v), &lin.z);
        let vs = st.v_s();
        let ds = add(&lin.direction.values, &lin.z_star_c.values);
        let w = at_qps(s, &add(&self.rigid_trace(), &vs));
        let dq = at_qps(s, &ds);
        let (dh, sh) = (normal_h(s, &ds), normal_h(s, &vs));
        let bd: f64 = s
            .qps()
            .iter()
            .enumerate()
            .map(|(i, q)| q.w * (0.5 * dh[i] * w[i].norm_squared() + sh[i] * w[i].dot(&dq[i])))
            .sum();
        vol + bd
    }
}
