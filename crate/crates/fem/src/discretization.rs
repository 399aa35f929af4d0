//! Exterior-domain discretization: mesh, mixed space, surface trace space
//! and the far-field closure bundled together.

use selfprop_core::{BodyGeometry, RigidMotion, SurfaceSpace, TraceField, TraceKind, Vec3, WeightFn};

use crate::assemble::{assemble_oseen, OseenOperator};
use crate::boundary::FarTemplate;
use crate::mesh::{build_mesh, ExteriorMesh, TetMesh};
use crate::norms::{functional_norms, FunctionalNorms};
use crate::solver::OseenSolver;
use crate::space::MixedSpace;
use crate::{FemError, Result};

/// Far-field rule for Dirichlet solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FarRule {
    /// Zero velocity on the far sphere; the body trace must be flux-free.
    Homogeneous,
    /// Flux-compensating template `c·x/|x|³` on the far sphere.
    FluxTemplate,
}

/// Everything needed to solve Oseen problems around one body.
#[derive(Debug)]
pub struct Discretization {
    pub ext: ExteriorMesh,
    pub surface: SurfaceSpace,
    pub space: MixedSpace,
    pub far: FarTemplate,
}

/// Relative flux tolerance for homogeneous far data.
pub const FLUX_TOL: f64 = 1e-12;

impl Discretization {
    pub fn new(body: &BodyGeometry, r_far: f64, h: f64) -> Result<Self> {
        Ok(Self::from_mesh(build_mesh(body, r_far, h)?))
    }

    pub fn from_mesh(ext: ExteriorMesh) -> Self {
        let surface = SurfaceSpace::new(&ext.body);
        let space = MixedSpace::exterior(&ext, &surface);
        let far = FarTemplate::new(&space, &surface);
        Self { ext, surface, space, far }
    }

    pub fn mesh(&self) -> &TetMesh {
        &self.ext.mesh
    }

    pub fn body(&self) -> &BodyGeometry {
        &self.ext.body
    }

    pub fn n_dofs(&self) -> usize {
        self.space.n_dofs()
    }

    pub fn zeros(&self) -> Vec<f64> {
        vec![0.0; self.n_dofs()]
    }

    pub fn assemble(&self, motion: &RigidMotion) -> OseenOperator {
        assemble_oseen(self.mesh(), &self.space, motion)
    }

    /// Assembles and factors the operator of `motion`.
    pub fn factor(&self, motion: &RigidMotion) -> Result<OseenSolver> {
        OseenSolver::new(self.mesh(), &self.space, self.assemble(motion))
    }

    /// Dirichlet vector of a body trace with the flux-compensating far data.
    pub fn dirichlet(&self, trace: &[Vec3]) -> Vec<f64> {
        self.far.data(&self.space, trace)
    }

    /// Dirichlet vector with the chosen far rule.
    pub fn dirichlet_with(&self, trace: &[Vec3], rule: FarRule) -> Result<Vec<f64>> {
        match rule {
            FarRule::FluxTemplate => Ok(self.dirichlet(trace)),
            FarRule::Homogeneous => {
                let flux = self.far.body_flux(trace);
                let scale = self.surface.area() * trace.iter().map(|v| v.norm()).fold(0.0, f64::max);
                if flux.abs() > FLUX_TOL * scale.max(1.0) {
                    return Err(FemError::numerical(format!(
                        "body trace carries flux {flux:.3e}; homogeneous far data would make the problem incompatible"
                    )));
                }
                let mut x = self.zeros();
                for (i, &n) in self.space.body_nodes.iter().enumerate() {
                    self.space.set_velocity(&mut x, n, &trace[i]);
                }
                Ok(x)
            }
        }
    }

    /// Solves the Dirichlet problem with body trace `trace`, the given far
    /// rule and volume load (a functional on the velocity rows).
    pub fn solve_dirichlet(&self, solver: &OseenSolver, trace: &[Vec3], rule: FarRule, load: &[f64]) -> Result<Vec<f64>> {
        solver.solve(&self.dirichlet_with(trace, rule)?, load)
    }

    /// Body traction of a solution of the forward problem with load `load`:
    /// the boundary residual `K x − load` on the body rows, realized in the
    /// trace space through the boundary mass matrix. For a solution of the
    /// Oseen problem this is `σ(u,p)n + (V·n)u`; the convective part is
    /// removed by [`Discretization::boundary_traction`].
    pub fn residual_trace(&self, r: &[f64]) -> TraceField {
        TraceField::new(self.surface.mass_solve(&self.space.body_functional(r)), TraceKind::General)
    }

    /// Traction `σ(u,p)n` on the body of a forward solution `x` of the
    /// Oseen operator of `solver` with load `load`.
    pub fn boundary_traction(&self, solver: &OseenSolver, x: &[f64], load: &[f64]) -> TraceField {
        let r = solver.residual(x, load);
        let mut func = self.space.body_functional(&r);
        // remove the convective boundary term ∮(V·n)(u·φ)
        let motion = solver.op.motion;
        let trace = self.space.body_trace(x);
        let conv = self.surface.functional(|q| {
            let vn = motion.velocity(&q.x).dot(&self.surface.face_normals[q.face]);
            vn * self.surface.interp(&trace, q)
        });
        for (f, c) in func.iter_mut().zip(&conv) {
            *f -= c;
        }
        TraceField::new(self.surface.mass_solve(&func), TraceKind::General)
    }

    /// Norms of the estimate list for the pair stored in `x`.
    pub fn functional_norms(&self, x: &[f64], motion: &RigidMotion) -> FunctionalNorms {
        let flux = self.far.body_flux(&self.space.body_trace(x));
        functional_norms(self.mesh(), &self.space, x, &WeightFn::new(*motion), flux)
    }
}
