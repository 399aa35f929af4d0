//! Projected-gradient minimization of the drag over the control ball of the
//! trace-norm surrogate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use selfprop_core::{SurfaceSpace, TraceField, TraceKind, Vec3};

use crate::state::{FlowState, Problem};
use crate::surf::apply;
use crate::{ControlError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeOptions {
    /// Radius of the admissible ball.
    pub kappa: f64,
    /// Stationarity tolerance (relative to the scale).
    pub tol: f64,
    pub max_iter: usize,
    /// Armijo slope constant and backtracking factor.
    pub armijo: f64,
    pub shrink: f64,
    pub max_backtracks: usize,
    pub n_random_probes: usize,
    pub seed: u64,
    /// Trial step of each line search.
    pub step_rule: StepRule,
}

/// First trial step of the backtracking line search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepRule {
    /// Twice the last accepted step.
    Doubling,
    /// Barzilai–Borwein quotient `⟨s,s⟩/⟨s,y⟩` of the last step `s` and
    /// gradient change `y` in the surrogate metric; doubling when `⟨s,y⟩ ≤ 0`.
    BarzilaiBorwein,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self { kappa: 0.1, tol: 1e-5, max_iter: 200, armijo: 1e-4, shrink: 0.5, max_backtracks: 40, n_random_probes: 8, seed: 7, step_rule: StepRule::BarzilaiBorwein }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Stationary,
    MaxIterations,
    LineSearchFailed,
    InnerSolver(String),
}

/// Record of an optimization run; entry k describes iterate k.
#[derive(Debug, Clone)]
pub struct OptimizationRun {
    pub iterates: Vec<TraceField>,
    pub j: Vec<f64>,
    pub stationarity: Vec<f64>,
    /// Surrogate norm of the Riesz gradient of `½J`.
    pub riesz_norm: Vec<f64>,
    /// Accepted step sizes (one fewer than the iterates).
    pub steps: Vec<f64>,
    /// Whether the iterate lies on the κ-sphere.
    pub active: Vec<bool>,
    pub termination: Termination,
    pub scale: f64,
    pub final_state: Option<FlowState>,
}

impl OptimizationRun {
    pub fn final_control(&self) -> &TraceField {
        self.iterates.last().expect("a run holds at least the initial iterate")
    }

    /// Whether the final iterate lies strictly inside the ball.
    pub fn is_interior(&self) -> bool {
        !self.active.last().copied().unwrap_or(false)
    }

    /// Surrogate norm of the Riesz gradient at an interior final iterate,
    /// which vanishes there exactly when `∮G·δ = 0` for every admissible `δ`.
    pub fn orthogonality_residual(&self) -> Option<f64> {
        if self.is_interior() { self.riesz_norm.last().copied() } else { None }
    }
}

/// Radial projection onto the ball of radius κ.
pub fn project_ball(s: &SurfaceSpace, v: &TraceField, kappa: f64) -> TraceField {
    let n = s.surrogate().norm(&v.values);
    if n <= kappa {
        v.clone()
    } else {
        v.scaled(kappa / n)
    }
}

/// Riesz representative in the surrogate inner product of the L² density
/// `G`: `⟨g, δ⟩ = ∮ G·δ` for every admissible δ.
pub fn riesz_gradient(s: &SurfaceSpace, g: &TraceField, kind: TraceKind) -> Result<TraceField> {
    Ok(s.surrogate().riesz(s, &s.mass_apply(&g.values), kind)?)
}

/// Same from a nodal functional.
pub fn riesz_functional(s: &SurfaceSpace, f: &[Vec3], kind: TraceKind) -> Result<TraceField> {
    Ok(s.surrogate().riesz(s, f, kind)?)
}

/// Residual of the variational inequality: `max_p −G(p − v̂)`, clipped at 0,
/// with `G` a nodal functional.
pub fn stationarity_residual(v_hat: &TraceField, g: &[Vec3], probes: &[TraceField]) -> f64 {
    probes
        .iter()
        .map(|p| {
            let d: Vec<Vec3> = p.values.iter().zip(&v_hat.values).map(|(a, b)| a - b).collect();
            -apply(g, &d)
        })
        .fold(0.0, f64::max)
}

/// Smooth random admissible fields of surrogate norm at most κ.
pub fn random_probes(s: &SurfaceSpace, kind: TraceKind, kappa: f64, n: usize, seed: u64) -> Vec<TraceField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            // quadratic polynomial field with random coefficients
            let c: Vec<f64> = (0..30).map(|_| rng.random_range(-1.0..1.0)).collect();
            let raw = s.sample(|x| {
                let m = [1.0, x.x, x.y, x.z, x.x * x.x, x.y * x.y, x.z * x.z, x.x * x.y, x.y * x.z, x.z * x.x];
                Vec3::new((0..10).map(|i| c[i] * m[i]).sum(), (0..10).map(|i| c[10 + i] * m[i]).sum(), (0..10).map(|i| c[20 + i] * m[i]).sum())
            });
            let f = s.constrain(&raw, kind);
            let nrm = s.surrogate().norm(&f.values);
            let r = kappa * rng.random_range(0.1..1.0);
            if nrm > 0.0 {
                f.scaled(r / nrm)
            } else {
                f
            }
        })
        .collect()
}

/// Probe set: the six corrector fields and the negative Riesz gradient on
/// the κ-sphere, and the random fields.
pub fn probe_set(p: &Problem, riesz: &TraceField, opts: &OptimizeOptions) -> Vec<TraceField> {
    let s = p.surface();
    let on_sphere = |f: &TraceField, sign: f64| {
        let n = s.surrogate().norm(&f.values);
        if n > 0.0 {
            f.scaled(sign * opts.kappa / n)
        } else {
            f.clone()
        }
    };
    let mut out: Vec<TraceField> = p.basis.fields.iter().map(|b| on_sphere(b, 1.0)).collect();
    out.push(on_sphere(riesz, -1.0));
    out.extend(random_probes(s, p.kind(), opts.kappa, opts.n_random_probes, opts.seed));
    out
}

struct Eval {
    state: FlowState,
    j: f64,
    /// Nodal functional of `½ DJ`.
    g: Vec<Vec3>,
    riesz: TraceField,
    riesz_norm: f64,
}

fn evaluate(p: &Problem, v: &TraceField, warm: Option<&FlowState>) -> Result<Eval> {
    let state = p.solve_state_from(v, warm)?;
    let j = p.drag(&state);
    let adj = p.solve_adjoint(&state)?;
    let g = p.gradient_functional(&state, &adj);
    let riesz = riesz_functional(p.surface(), &g, p.kind())?;
    let riesz_norm = p.surface().surrogate().norm(&riesz.values);
    Ok(Eval { state, j, g, riesz, riesz_norm })
}

/// Projected gradient with Armijo backtracking, started from `v0`.
pub fn optimize(p: &Problem, v0: &TraceField, opts: &OptimizeOptions) -> Result<OptimizationRun> {
    if opts.kappa <= 0.0 {
        return Err(ControlError::Invalid("κ must be positive".into()));
    }
    let s = p.surface();
    let sur = s.surrogate();
    let mut v = project_ball(s, v0, opts.kappa);
    let scale = p.scale(&v);
    let mut run = OptimizationRun {
        iterates: Vec::new(),
        j: Vec::new(),
        stationarity: Vec::new(),
        riesz_norm: Vec::new(),
        steps: Vec::new(),
        active: Vec::new(),
        termination: Termination::MaxIterations,
        scale,
        final_state: None,
    };
    let mut cur = match evaluate(p, &v, None) {
        Ok(e) => e,
        Err(e) => {
            run.termination = Termination::InnerSolver(e.to_string());
            return Ok(run);
        }
    };
    let mut alpha = 0.0;
    // previous iterate and Riesz gradient
    let mut last: Option<(TraceField, TraceField)> = None;
    for it in 0..=opts.max_iter {
        let probes = probe_set(p, &cur.riesz, opts);
        let res = stationarity_residual(&v, &cur.g, &probes);
        let vn = sur.norm(&v.values);
        run.iterates.push(v.clone());
        run.j.push(cur.j);
        run.stationarity.push(res);
        run.riesz_norm.push(cur.riesz_norm);
        run.active.push(vn >= opts.kappa * (1.0 - 1e-9));
        log::info!("optimizer iteration {it}: J = {:.12e}, stationarity {res:.3e}, |v_*| = {vn:.4e}", cur.j);
        if res <= opts.tol * scale {
            run.termination = Termination::Stationary;
            break;
        }
        if it == opts.max_iter {
            run.termination = Termination::MaxIterations;
            break;
        }
        // gradient of J in the surrogate metric is 2·riesz(½DJ)
        let gn = 2.0 * cur.riesz_norm;
        if alpha == 0.0 {
            alpha = 0.5 * opts.kappa / gn;
        } else {
            alpha = match (opts.step_rule, &last) {
                (StepRule::BarzilaiBorwein, Some((s_prev, r_prev))) => {
                    let sk: Vec<Vec3> = v.values.iter().zip(&s_prev.values).map(|(a, b)| a - b).collect();
                    let yk: Vec<Vec3> = cur.riesz.values.iter().zip(&r_prev.values).map(|(a, b)| 2.0 * (a - b)).collect();
                    let (ss, sy) = (sur.inner(&sk, &sk), sur.inner(&sk, &yk));
                    if sy > 0.0 && ss > 0.0 {
                        ss / sy
                    } else {
                        2.0 * alpha
                    }
                }
                _ => 2.0 * alpha,
            };
        }
        let mut accepted = None;
        for _ in 0..opts.max_backtracks {
            let trial = project_ball(s, &v.axpy(-2.0 * alpha, &cur.riesz), opts.kappa);
            let step: Vec<Vec3> = trial.values.iter().zip(&v.values).map(|(a, b)| a - b).collect();
            let dn2 = sur.inner(&step, &step);
            if let Ok(e) = evaluate(p, &trial, Some(&cur.state)) {
                if e.j <= cur.j - opts.armijo / alpha * dn2 && dn2 > 0.0 {
                    accepted = Some((trial, e));
                    break;
                }
            }
            alpha *= opts.shrink;
        }
        match accepted {
            Some((t, e)) => {
                run.steps.push(alpha);
                last = Some((v.clone(), cur.riesz.clone()));
                v = t;
                cur = e;
            }
            None => {
                run.termination = Termination::LineSearchFailed;
                break;
            }
        }
    }
    run.final_state = Some(cur.state);
    Ok(run)
}
