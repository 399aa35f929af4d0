//! Direct solves of the Dirichlet problem for the assembled operator.
//!
//! Unknowns split into prescribed ones (velocity at every boundary node and
//! one pinned pressure value) and free ones. The free block `S = K_II` is
//! factored once by sparse LU; forward problems use `S`, transposed
//! (adjoint) problems use `Sᵀ` from the same factorization. All boundary
//! data handed to the solver are flux-compatible, so the continuity row of
//! the pinned pressure is implied by the others; the pressure is then
//! shifted to zero mean.

use faer::linalg::solvers::SolveCore;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Conj, Mat};
use selfprop_core::sparse::Csr;

use crate::assemble::OseenOperator;
use crate::mesh::TetMesh;
use crate::space::MixedSpace;
use crate::{FemError, Result};

/// Relative residual accepted from the direct solver.
pub const SOLVER_TOL: f64 = 1e-10;

/// Factored Dirichlet problem for one operator.
pub struct OseenSolver {
    pub op: OseenOperator,
    free: Vec<usize>,
    free_pos: Vec<usize>,
    pin: usize,
    p_off: usize,
    p_weight: Vec<f64>,
    lu: Lu<usize, f64>,
}

impl std::fmt::Debug for OseenSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OseenSolver").field("free", &self.free.len()).field("pin", &self.pin).finish()
    }
}

/// `∫ψ_v` for every pressure basis function.
pub fn pressure_weights(mesh: &TetMesh) -> Vec<f64> {
    let mut w = vec![0.0; mesh.n_points()];
    for t in 0..mesh.n_tets() {
        let v = crate::mesh::signed_volume(&mesh.points, &mesh.tets[t]).abs() / 4.0;
        for &i in &mesh.tets[t] {
            w[i] += v;
        }
    }
    w
}

impl OseenSolver {
    pub fn new(mesh: &TetMesh, space: &MixedSpace, op: OseenOperator) -> Result<Self> {
        let n = space.n_dofs();
        // pin the pressure at the last mesh point (on the outer boundary for
        // exterior meshes)
        let pin = space.pressure_dof(space.n_points - 1);
        let free: Vec<usize> = (0..n).filter(|&d| d != pin && !space.is_boundary_dof(d)).collect();
        let mut free_pos = vec![usize::MAX; n];
        for (i, &d) in free.iter().enumerate() {
            free_pos[d] = i;
        }
        let (col_ptr, row_idx, values) = free_block_csc(&op.k, &free, &free_pos);
        let m = free.len();
        let sym = SymbolicSparseColMatRef::new_checked(m, m, &col_ptr, None, &row_idx);
        let mat = SparseColMatRef::new(sym, &values);
        let lu = mat.sp_lu().map_err(|e| FemError::numerical(format!("sparse LU failed: {e:?}")))?;
        Ok(Self { op, free, free_pos, pin, p_off: 3 * space.n_nodes(), p_weight: pressure_weights(mesh), lu })
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    /// Solves `(K x)_I = load_I` with the prescribed entries of `x` taken from
    /// `data` (boundary velocities; the pinned pressure is ignored).
    pub fn solve(&self, data: &[f64], load: &[f64]) -> Result<Vec<f64>> {
        self.solve_many(&[data.to_vec()], &[load.to_vec()], false).map(|mut v| v.pop().unwrap())
    }

    /// Same with `Kᵀ`.
    pub fn solve_transpose(&self, data: &[f64], load: &[f64]) -> Result<Vec<f64>> {
        self.solve_many(&[data.to_vec()], &[load.to_vec()], true).map(|mut v| v.pop().unwrap())
    }

    /// Several right-hand sides against the same factorization.
    pub fn solve_many(&self, data: &[Vec<f64>], load: &[Vec<f64>], transpose: bool) -> Result<Vec<Vec<f64>>> {
        assert_eq!(data.len(), load.len());
        let m = self.free.len();
        let k = data.len();
        let mut xs: Vec<Vec<f64>> = data
            .iter()
            .map(|d| {
                let mut x = d.clone();
                for &i in &self.free {
                    x[i] = 0.0;
                }
                x[self.pin] = 0.0;
                x
            })
            .collect();
        let mut scales = vec![0.0; k];
        let mut rhs = Mat::<f64>::zeros(m, k);
        for j in 0..k {
            let kx = self.apply(&xs[j], transpose);
            let mut s = 0.0f64;
            for (i, &d) in self.free.iter().enumerate() {
                rhs[(i, j)] = load[j][d] - kx[d];
                s = s.max(load[j][d].abs()).max(kx[d].abs());
            }
            scales[j] = s;
        }
        let mut history = Vec::new();
        for it in 0..4 {
            let mut sol = rhs.clone();
            if transpose {
                self.lu.solve_transpose_in_place_with_conj(Conj::No, sol.as_mut());
            } else {
                self.lu.solve_in_place_with_conj(Conj::No, sol.as_mut());
            }
            for j in 0..k {
                for (i, &d) in self.free.iter().enumerate() {
                    xs[j][d] += sol[(i, j)];
                }
            }
            let mut worst = 0.0f64;
            for j in 0..k {
                let kx = self.apply(&xs[j], transpose);
                for (i, &d) in self.free.iter().enumerate() {
                    let r = load[j][d] - kx[d];
                    rhs[(i, j)] = r;
                    if scales[j] > 0.0 {
                        worst = worst.max(r.abs() / scales[j]);
                    }
                }
            }
            history.push(worst);
            if worst <= 1e-13 || (it > 0 && worst > 0.5 * history[it - 1]) {
                break;
            }
        }
        let last = *history.last().unwrap();
        if last > SOLVER_TOL {
            return Err(FemError::Numerical { msg: "direct solve did not reach the residual tolerance".into(), history });
        }
        for x in xs.iter_mut() {
            self.normalize_pressure(x);
        }
        Ok(xs)
    }

    fn apply(&self, x: &[f64], transpose: bool) -> Vec<f64> {
        if transpose {
            self.op.k.matvec_t(x)
        } else {
            self.op.k.matvec(x)
        }
    }

    /// Shifts the pressure to zero mean.
    pub fn normalize_pressure(&self, x: &mut [f64]) {
        let p = &mut x[self.p_off..];
        let wsum: f64 = self.p_weight.iter().sum();
        let mean = p.iter().zip(&self.p_weight).map(|(a, b)| a * b).sum::<f64>() / wsum;
        p.iter_mut().for_each(|v| *v -= mean);
    }

    /// Full residual `K x − load` (all rows).
    pub fn residual(&self, x: &[f64], load: &[f64]) -> Vec<f64> {
        let mut r = self.op.k.matvec(x);
        r.iter_mut().zip(load).for_each(|(a, b)| *a -= b);
        r
    }

    /// Full residual `Kᵀ x − load`.
    pub fn residual_transpose(&self, x: &[f64], load: &[f64]) -> Vec<f64> {
        let mut r = self.op.k.matvec_t(x);
        r.iter_mut().zip(load).for_each(|(a, b)| *a -= b);
        r
    }

    /// Largest residual over the free rows, relative to `scale`.
    pub fn free_residual(&self, r: &[f64]) -> f64 {
        self.free.iter().map(|&d| r[d].abs()).fold(0.0, f64::max)
    }

    pub fn is_free(&self, dof: usize) -> bool {
        self.free_pos[dof] != usize::MAX
    }
}

/// Column-compressed free block of a row-compressed matrix.
fn free_block_csc(k: &Csr, free: &[usize], free_pos: &[usize]) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
    let m = free.len();
    let mut count = vec![0usize; m + 1];
    for &r in free {
        let (cols, _) = k.row(r);
        for &c in cols {
            let j = free_pos[c];
            if j != usize::MAX {
                count[j + 1] += 1;
            }
        }
    }
    for j in 0..m {
        count[j + 1] += count[j];
    }
    let nnz = count[m];
    let mut next = count.clone();
    let mut row_idx = vec![0usize; nnz];
    let mut values = vec![0.0; nnz];
    for (i, &r) in free.iter().enumerate() {
        let (cols, vals) = k.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            let j = free_pos[c];
            if j != usize::MAX {
                row_idx[next[j]] = i;
                values[next[j]] = v;
                next[j] += 1;
            }
        }
    }
    (count, row_idx, values)
}
