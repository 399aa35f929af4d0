//! Self-propelled steady states by Picard iteration of the corrected
//! linear problem, with drag, traction and balance residuals.

use nalgebra::Vector6;
use selfprop_core::{BodyGeometry, RigidMotion, SurfaceSpace, TraceField, TraceKind, Vec3, WeightFn};
use selfprop_fem::assemble::{assemble_velocity_form, cell_velocity, convection_vector, deformation_energy};
use selfprop_fem::norms::{grad_norm, sup};
use selfprop_fem::{Discretization, FarRule, MixedSpace, OseenSolver, TetMesh};

use crate::basis::PropulsionBasis;
use crate::surf::{self, add, apply, at_qps, normal_f, normal_h, rigid_at_qps, rigid_pairings, rigid_traces};
use crate::{ControlError, Result};

/// Fixed-point controls shared by the state and adjoint iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateOptions {
    /// Bound on the increment in the 𝒳-type metric (relative to the scale).
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for StateOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 50 }
    }
}

/// A discretized body with its factored operator and propulsion basis.
pub struct Problem<'a> {
    pub disc: &'a Discretization,
    pub solver: OseenSolver,
    pub basis: PropulsionBasis,
    pub opts: StateOptions,
    pub(crate) rigid: Vec<Vec<Vec3>>,
}

/// Residual report of a state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Residuals {
    /// Largest free-row residual of the nonlinear momentum equations.
    pub momentum: f64,
    /// `|m ξ×ω + ∮[−σn + (v_s·n)(v_s + V + ω×x)]|`.
    pub force_balance: f64,
    /// Torque analogue.
    pub torque_balance: f64,
    /// `Φ = ∮ n·v`.
    pub flux: f64,
    /// Net force in momentum-flux form.
    pub net_force: Vec3,
}

/// Converged self-propelled state.
#[derive(Debug, Clone)]
pub struct FlowState {
    /// Velocity and pressure unknowns.
    pub x: Vec<f64>,
    /// Corrector coefficients `(α, β)`.
    pub coeffs: Vector6<f64>,
    pub motion: RigidMotion,
    pub v_star: TraceField,
    pub v_star_c: TraceField,
    pub residuals: Residuals,
    pub increments: Vec<f64>,
    pub ratios: Vec<f64>,
}

impl FlowState {
    pub fn alpha(&self) -> Vec3 {
        Vec3::new(self.coeffs[0], self.coeffs[1], self.coeffs[2])
    }

    pub fn beta(&self) -> Vec3 {
        Vec3::new(self.coeffs[3], self.coeffs[4], self.coeffs[5])
    }

    /// Boundary velocity relative to the rigid motion, `v_* + v_*^𝒞`.
    pub fn v_s(&self) -> Vec<Vec3> {
        add(&self.v_star.values, &self.v_star_c.values)
    }

    pub fn iterations(&self) -> usize {
        self.increments.len()
    }

    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(0.0, f64::max)
    }
}

/// Volume forcing of a frozen velocity.
#[derive(Debug, Clone)]
pub struct Forcing {
    /// `(f, φ)` with `f = −v̄·∇v̄`.
    pub volume: Vec<f64>,
    /// `−(F, ∇φ)` with `F = −v̄⊗v̄`, i.e. `((v̄·∇φ), v̄)`.
    pub divergence: Vec<f64>,
}

pub fn rhs_force(mesh: &TetMesh, space: &MixedSpace, vbar: &[f64]) -> Forcing {
    let volume = assemble_velocity_form(mesh, space, |t, q, loc| {
        let u = cell_velocity(space, vbar, &space.tet_nodes[t]);
        let f = -(q.gradient(&u) * q.value(&u));
        for i in 0..10 {
            for c in 0..3 {
                loc[3 * i + c] += q.w * q.phi[i] * f[c];
            }
        }
    });
    Forcing { volume, divergence: convection_vector(mesh, space, vbar, vbar) }
}

/// Right-hand sides `(ξ_f, ω_f)` of the force and torque conditions for the
/// boundary velocity `v_s = v_* + v̄_*^𝒞`.
pub fn propulsion_defect(s: &SurfaceSpace, body: &BodyGeometry, motion: &RigidMotion, v_s: &[Vec3]) -> (Vec3, Vec3) {
    let vs = at_qps(s, v_s);
    let sn = normal_h(s, v_s);
    let big_v = rigid_at_qps(s, motion);
    let vn: Vec<f64> = s.qps().iter().zip(&big_v).map(|(q, v)| v.dot(&s.face_normals[q.face])).collect();
    let w = motion.omega;
    let g: Vec<Vec3> = s
        .qps()
        .iter()
        .enumerate()
        .map(|(i, q)| sn[i] * (vs[i] + big_v[i] + w.cross(&q.x)) + vn[i] * (big_v[i] + vs[i]))
        .collect();
    let xi_f = -surf::integral(s, &g) - body.mass * motion.xi.cross(&w);
    let om_f = -surf::moment(s, &g) - (body.inertia * w).cross(&w);
    (xi_f, om_f)
}

impl<'a> Problem<'a> {
    /// Factors the operator of `motion` and builds the basis of `kind`.
    pub fn new(disc: &'a Discretization, motion: &RigidMotion, kind: TraceKind) -> Result<Self> {
        let solver = disc.factor(motion)?;
        let basis = PropulsionBasis::new(disc, &solver, kind)?;
        Self::from_parts(disc, solver, basis)
    }

    pub fn from_parts(disc: &'a Discretization, solver: OseenSolver, basis: PropulsionBasis) -> Result<Self> {
        if basis.motion != solver.op.motion {
            return Err(ControlError::Invalid("basis and operator belong to different rigid motions".into()));
        }
        let rigid = rigid_traces(&disc.surface);
        Ok(Self { disc, solver, basis, opts: StateOptions::default(), rigid })
    }

    pub fn motion(&self) -> RigidMotion {
        self.solver.op.motion
    }

    pub fn kind(&self) -> TraceKind {
        self.basis.kind
    }

    pub fn surface(&self) -> &SurfaceSpace {
        &self.disc.surface
    }

    /// `max(1, |ξ| + |ω| + ‖v_*‖)` with the trace-norm surrogate.
    pub fn scale(&self, v_star: &TraceField) -> f64 {
        let m = self.motion();
        (m.xi.norm() + m.omega.norm() + self.surface().surrogate().norm(&v_star.values)).max(1.0)
    }

    /// `|v|_{1,2} + sup ϖ|v| + |c|`.
    pub fn metric(&self, x: &[f64], c: &Vector6<f64>) -> f64 {
        let w = WeightFn::new(self.motion());
        let mesh = self.disc.mesh();
        grad_norm(mesh, &self.disc.space, x) + sup(mesh, &self.disc.space, x, |p, u| w.eval(p) * u.norm()) + c.norm()
    }

    /// Nodal rigid trace `V`.
    pub fn rigid_trace(&self) -> Vec<Vec3> {
        let m = self.motion();
        self.surface().sample(|x| m.velocity(x))
    }

    /// Body functional of a full residual vector paired with the six rigid
    /// traces.
    pub fn rigid_rows(&self, r: &[f64]) -> [f64; 6] {
        let rb = self.disc.space.body_functional(r);
        std::array::from_fn(|k| apply(&rb, &self.rigid[k]))
    }

    /// One solve of the corrected linear problem around `(v̄, c̄)`.
    pub fn linear_step(&self, xbar: &[f64], cbar: &Vector6<f64>, v_star: &TraceField) -> Result<(Vec<f64>, Vector6<f64>)> {
        let d = self.disc;
        let s = self.surface();
        let load = convection_vector(d.mesh(), &d.space, xbar, xbar);
        let vs_bar = add(&v_star.values, &self.basis.combine(cbar));
        let (xi_f, om_f) = propulsion_defect(s, d.body(), &self.motion(), &vs_bar);
        let trace = add(&self.rigid_trace(), &v_star.values);
        let uf = d.solve_dirichlet(&self.solver, &trace, FarRule::FluxTemplate, &load)?;
        let pr = self.rigid_rows(&self.solver.residual(&uf, &load));
        let vb = at_qps(s, &d.space.body_trace(xbar));
        let vbn = normal_f(s, &d.space.body_trace(xbar));
        let conv: Vec<Vec3> = vb.iter().zip(&vbn).map(|(v, n)| *n * v).collect();
        let cp = rigid_pairings(s, &conv);
        let data = [xi_f.x, xi_f.y, xi_f.z, om_f.x, om_f.y, om_f.z];
        let rhs = Vector6::from_fn(|k, _| -data[k] - cp[k] - pr[k]);
        let c = self.basis.solve_t(&rhs);
        let mut x = uf;
        for (j, l) in self.basis.lifts.iter().enumerate() {
            surf::axpy_vec(&mut x, c[j], l);
        }
        Ok((x, c))
    }

    pub fn solve_state(&self, v_star: &TraceField) -> Result<FlowState> {
        self.solve_state_from(v_star, None)
    }

    /// Picard iteration, optionally warm-started from a previous state.
    pub fn solve_state_from(&self, v_star: &TraceField, warm: Option<&FlowState>) -> Result<FlowState> {
        if v_star.kind != self.kind() {
            return Err(ControlError::Invalid(format!("control is {} but the basis is {}", v_star.kind.name(), self.kind().name())));
        }
        v_star.check(self.surface())?;
        let scale = self.scale(v_star);
        let (mut x, mut c) = match warm {
            Some(w) => (w.x.clone(), w.coeffs),
            None => (self.disc.zeros(), Vector6::zeros()),
        };
        let mut increments = Vec::new();
        let mut ratios = Vec::new();
        let mut streak = 0;
        loop {
            let (xn, cn) = self.linear_step(&x, &c, v_star)?;
            let dx: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
            let inc = self.metric(&dx, &(cn - c));
            if let Some(&prev) = increments.last() {
                let r: f64 = if prev > 0.0 { inc / prev } else { 0.0 };
                ratios.push(r);
                streak = if r >= 1.0 { streak + 1 } else { 0 };
            }
            increments.push(inc);
            x = xn;
            c = cn;
            log::debug!("state iteration {}: increment {inc:.3e}", increments.len());
            if inc <= self.opts.tol * scale {
                break;
            }
            if streak >= 3 {
                return Err(ControlError::NonContraction { what: "state iteration", ratios });
            }
            if increments.len() >= self.opts.max_iter {
                return Err(ControlError::MaxIterations { what: "state iteration", iterations: increments.len(), last: inc });
            }
        }
        let v_star_c = TraceField::new(self.basis.combine(&c), self.kind());
        let mut st = FlowState { x, coeffs: c, motion: self.motion(), v_star: v_star.clone(), v_star_c, residuals: Residuals::default(), increments, ratios };
        st.residuals = self.self_propulsion_residual(&st);
        Ok(st)
    }

    /// Nonlinear residual `K x − ((v·∇φ), v)`.
    pub fn nonlinear_residual(&self, x: &[f64]) -> Vec<f64> {
        let load = convection_vector(self.disc.mesh(), &self.disc.space, x, x);
        self.solver.residual(x, &load)
    }

    /// Nodal functional `φ ↦ ∮ σ(v,p)n·φ` of a state.
    pub fn traction_functional(&self, st: &FlowState) -> Vec<Vec3> {
        let s = self.surface();
        let mut f = self.disc.space.body_functional(&self.nonlinear_residual(&st.x));
        let v = at_qps(s, &self.disc.space.body_trace(&st.x));
        let sn = normal_f(s, &st.v_s());
        let g: Vec<Vec3> = v.iter().zip(&sn).map(|(v, n)| *n * v).collect();
        surf::axpy(&mut f, 1.0, &surf::functional(s, &g));
        f
    }

    /// Traction density `σ(v,p)n`.
    pub fn traction(&self, st: &FlowState) -> TraceField {
        TraceField::new(self.surface().mass_solve(&self.traction_functional(st)), TraceKind::General)
    }

    /// `J = 2‖D(v)‖² + ½∮((v_*+v_*^𝒞)·n)|V + v_* + v_*^𝒞|²`.
    pub fn drag(&self, st: &FlowState) -> f64 {
        let s = self.surface();
        let vs = st.v_s();
        let sn = normal_h(s, &vs);
        let v = at_qps(s, &add(&self.rigid_trace(), &vs));
        let bt: f64 = s.qps().iter().enumerate().map(|(i, q)| q.w * sn[i] * v[i].norm_squared()).sum();
        deformation_energy(self.disc.mesh(), &self.disc.space, &st.x) + 0.5 * bt
    }

    /// Direct boundary work `∮ v·σ(v,p)n`.
    pub fn boundary_work(&self, st: &FlowState) -> f64 {
        apply(&self.traction_functional(st), &self.disc.space.body_trace(&st.x))
    }

    /// Balance defects, the net force in momentum-flux form and the flux.
    pub fn self_propulsion_residual(&self, st: &FlowState) -> Residuals {
        let s = self.surface();
        let m = self.motion();
        let body = self.disc.body();
        let tf = self.traction_functional(st);
        let sig: [f64; 6] = std::array::from_fn(|k| apply(&tf, &self.rigid[k]));
        let vs = st.v_s();
        let sn = normal_h(s, &vs);
        let v = at_qps(s, &self.disc.space.body_trace(&st.x));
        let big_v = rigid_at_qps(s, &m);
        let vn: Vec<f64> = s.qps().iter().zip(&big_v).map(|(q, u)| u.dot(&s.face_normals[q.face])).collect();
        let wx: Vec<Vec3> = s.qps().iter().map(|q| m.omega.cross(&q.x)).collect();
        let bal: Vec<Vec3> = (0..v.len()).map(|i| sn[i] * (v[i] + wx[i])).collect();
        let bp = rigid_pairings(s, &bal);
        let mf = body.mass * m.xi.cross(&m.omega);
        let mt = (body.inertia * m.omega).cross(&m.omega);
        let df = Vec3::new(mf.x - sig[0] + bp[0], mf.y - sig[1] + bp[1], mf.z - sig[2] + bp[2]);
        let dt = Vec3::new(mt.x - sig[3] + bp[3], mt.y - sig[4] + bp[4], mt.z - sig[5] + bp[5]);
        // N = ∮[σn + v(V·n) − (ω×x)(v·n) − v(v·n)] with v·n = V·n_f + (v_s·n)_h
        let nf: Vec<Vec3> = (0..v.len()).map(|i| -sn[i] * v[i] - wx[i] * (vn[i] + sn[i])).collect();
        let net = Vec3::new(sig[0], sig[1], sig[2]) + surf::integral(s, &nf);
        let flux = s.flux(&vs) + s.qps().iter().zip(&vn).map(|(q, a)| q.w * a).sum::<f64>();
        let r = self.nonlinear_residual(&st.x);
        Residuals { momentum: self.solver.free_residual(&r), force_balance: df.norm(), torque_balance: dt.norm(), flux, net_force: net }
    }

    /// Weak-form residual against the decaying test field with rigid trace
    /// `ℓ + k×x` built from the basic motions.
    pub fn weak_form_residual(&self, st: &FlowState, l: &Vec3, k: &Vec3) -> f64 {
        let s = self.surface();
        let m = self.motion();
        let body = self.disc.body();
        let mut y = self.disc.zeros();
        for i in 0..3 {
            surf::axpy_vec(&mut y, l[i], &self.basis.basic[i]);
            surf::axpy_vec(&mut y, k[i], &self.basis.basic[3 + i]);
        }
        let vol = surf::dot(&y, &self.nonlinear_residual(&st.x));
        let vs = st.v_s();
        let sh = normal_h(s, &vs);
        let sf = normal_f(s, &vs);
        let v = at_qps(s, &self.disc.space.body_trace(&st.x));
        let bd: f64 = s
            .qps()
            .iter()
            .enumerate()
            .map(|(i, q)| {
                let u = l + k.cross(&q.x);
                q.w * (sh[i] * m.omega.cross(&q.x).dot(&u) + (sh[i] - sf[i]) * v[i].dot(&u))
            })
            .sum();
        vol - body.mass * m.xi.cross(&m.omega).dot(l) - (body.inertia * m.omega).cross(&m.omega).dot(k) - bd
    }
}
