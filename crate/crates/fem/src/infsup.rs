//! Eigenvalue probe of the discrete inf-sup constant.
//!
//! β² is the smallest nonzero eigenvalue of `B A⁻¹ Bᵀ p = λ M_p p` with `A`
//! the velocity block of the Stokes operator on zero-trace velocities, `B`
//! the divergence block and `M_p` the pressure mass matrix. Dense, meant for
//! small meshes.

use nalgebra::DMatrix;
use selfprop_core::quadrature::tet_rule;

use crate::assemble::assemble_stokes;
use crate::mesh::TetMesh;
use crate::space::{MixedSpace, TetGeom};
use crate::{FemError, Result};

/// Largest pressure space handled by the dense probe.
pub const MAX_PROBE_PRESSURES: usize = 2500;

pub fn inf_sup_constant(mesh: &TetMesh, space: &MixedSpace) -> Result<f64> {
    let np = space.n_points;
    if np > MAX_PROBE_PRESSURES {
        return Err(FemError::numerical(format!("inf-sup probe limited to {MAX_PROBE_PRESSURES} pressures, got {np}")));
    }
    let k = assemble_stokes(mesh, space);
    let nv = space.n_velocity();
    let free: Vec<usize> = (0..nv).filter(|&d| !space.is_boundary_dof(d)).collect();
    let mut pos = vec![usize::MAX; nv];
    free.iter().enumerate().for_each(|(i, &d)| pos[d] = i);
    let m = free.len();
    let mut a = DMatrix::<f64>::zeros(m, m);
    let mut bt = DMatrix::<f64>::zeros(m, np);
    for (i, &d) in free.iter().enumerate() {
        let (cols, vals) = k.row(d);
        for (&c, &v) in cols.iter().zip(vals) {
            if c < nv {
                if pos[c] != usize::MAX {
                    a[(i, pos[c])] = v;
                }
            } else {
                bt[(i, c - nv)] = v;
            }
        }
    }
    let chol = a.cholesky().ok_or_else(|| FemError::numerical("velocity block is not positive definite"))?;
    let x = chol.solve(&bt);
    let s = bt.transpose() * x;
    let mut mp = DMatrix::<f64>::zeros(np, np);
    let rule = tet_rule(2);
    for t in 0..mesh.n_tets() {
        let g = TetGeom::new(&mesh.corners(t));
        let v = &mesh.tets[t];
        for q in &rule {
            for i in 0..4 {
                for j in 0..4 {
                    mp[(v[i], v[j])] += q.weight * g.vol * q.bary[i] * q.bary[j];
                }
            }
        }
    }
    let l = mp.cholesky().ok_or_else(|| FemError::numerical("pressure mass is not positive definite"))?.l();
    let li = l.clone().try_inverse().ok_or_else(|| FemError::numerical("singular pressure mass"))?;
    let c = &li * s * li.transpose();
    let c = 0.5 * (&c + c.transpose());
    let mut ev: Vec<f64> = c.symmetric_eigenvalues().iter().cloned().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // the constant pressure is in the kernel of Bᵀ on zero-trace velocities
    Ok(ev[1].max(0.0).sqrt())
}
