//! Numerical audits shared by `linearize`, `adjoint`, `verify` and the
//! acceptance runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use selfprop_control::linearized::LinearizedState;
use selfprop_control::{FlowState, Problem};
use selfprop_core::{SurfaceSpace, TraceField, TraceKind, Vec3};

use crate::error::Result;

/// Smooth admissible field of `kind` built from six coefficients.
pub fn smooth_field(s: &SurfaceSpace, kind: TraceKind, c: [f64; 6], amp: f64) -> TraceField {
    let raw = s.sample(|x| Vec3::new(c[0] + c[1] * x.y, c[2] + c[3] * x.z * x.x, c[4] + c[5] * x.x) + Vec3::new(c[5], c[3], c[1]).cross(x));
    s.constrain(&raw, kind).scaled(amp)
}

/// Reproducible smooth directions of amplitude 0.1.
pub fn directions(s: &SurfaceSpace, kind: TraceKind, n: usize, seed: u64) -> Vec<TraceField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let c: [f64; 6] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            smooth_field(s, kind, c, 0.1)
        })
        .collect()
}

/// Base control used by the derivative audits.
pub fn audit_control(s: &SurfaceSpace, kind: TraceKind, amp: f64) -> TraceField {
    smooth_field(s, kind, [0.4, -0.3, 0.2, 0.5, -0.1, 0.3], amp)
}

fn diff(a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| (x - y) * s).collect()
}

/// Relative error of the forward difference quotient of the state against
/// the linearized state, in the state metric.
pub fn fd_error(p: &Problem, st: &FlowState, delta: &TraceField, h: f64, z: &LinearizedState) -> Result<f64> {
    let sh = p.solve_state(&st.v_star.axpy(h, delta))?;
    let dx = diff(&sh.x, &st.x, 1.0 / h);
    let dc = (sh.coeffs - st.coeffs) / h;
    Ok(p.metric(&diff(&dx, &z.z, 1.0), &(dc - z.dc)) / p.metric(&z.z, &z.dc))
}

#[derive(Debug, Clone)]
pub struct SlopeStudy {
    pub steps: Vec<f64>,
    pub errors: Vec<f64>,
    /// Slopes between consecutive steps (per decade).
    pub slopes: Vec<f64>,
    /// Least-squares slope of log error against log step.
    pub fitted: f64,
}

pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Forward-difference study of the control-to-state derivative at `v`.
pub fn derivative_study(p: &Problem, v: &TraceField, delta: &TraceField, steps: &[f64]) -> Result<SlopeStudy> {
    let st = p.solve_state(v)?;
    let z = p.solve_linearized(&st, delta)?;
    let errors = steps.iter().map(|&h| fd_error(p, &st, delta, h, &z)).collect::<Result<Vec<_>>>()?;
    let slopes = steps.windows(2).zip(errors.windows(2)).map(|(s, e)| (e[0] / e[1]).ln() / (s[0] / s[1]).ln()).collect();
    Ok(SlopeStudy { steps: steps.to_vec(), fitted: loglog_slope(steps, &errors), errors, slopes })
}

#[derive(Debug, Clone, Copy)]
pub struct GradientRow {
    /// Central difference of J.
    pub fd: f64,
    /// `2∮G·δ` from the adjoint gradient.
    pub adjoint: f64,
    /// `DJ·δ` from the linearized state.
    pub linearized: f64,
}

impl GradientRow {
    pub fn fd_error(&self) -> f64 {
        rel(self.adjoint, self.fd)
    }

    pub fn linearized_error(&self) -> f64 {
        rel(self.adjoint, self.linearized)
    }
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Adjoint gradient against central differences of J along `dirs`.
pub fn gradient_study(p: &Problem, v: &TraceField, dirs: &[TraceField], h: f64) -> Result<(TraceField, Vec<GradientRow>)> {
    let s = p.surface();
    let st = p.solve_state(v)?;
    let adj = p.solve_adjoint(&st)?;
    let g = p.gradient(&st, &adj);
    let rows = dirs
        .iter()
        .map(|d| {
            let jp = p.drag(&p.solve_state(&v.axpy(h, d))?);
            let jm = p.drag(&p.solve_state(&v.axpy(-h, d))?);
            let lin = p.drag_derivative(&st, &p.solve_linearized(&st, d)?);
            Ok(GradientRow { fd: (jp - jm) / (2.0 * h), adjoint: 2.0 * s.inner(&g.values, &d.values), linearized: lin })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((g, rows))
}

/// Pass/fail record of one audit.
#[derive(Debug, Clone)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub value: f64,
    /// Human-readable acceptance condition.
    pub limit: String,
    pub pass: bool,
}

#[derive(Debug, Default)]
pub struct Checks {
    pub rows: Vec<Check>,
}

impl Checks {
    pub fn at_most(&mut self, suite: &'static str, name: impl Into<String>, value: f64, limit: f64) {
        self.rows.push(Check { suite, name: name.into(), value, limit: format!("<= {limit:e}"), pass: value <= limit });
    }

    pub fn within(&mut self, suite: &'static str, name: impl Into<String>, value: f64, lo: f64, hi: f64) {
        self.rows.push(Check { suite, name: name.into(), value, limit: format!("in [{lo}, {hi}]"), pass: (lo..=hi).contains(&value) });
    }

    pub fn holds(&mut self, suite: &'static str, name: impl Into<String>, ok: bool) {
        self.rows.push(Check { suite, name: name.into(), value: f64::from(u8::from(ok)), limit: "== 1".into(), pass: ok });
    }

    /// Records a failed audit whose computation raised an error.
    pub fn error(&mut self, suite: &'static str, name: impl Into<String>, msg: &str) {
        log::error!("{suite}: {msg}");
        self.rows.push(Check { suite, name: name.into(), value: f64::NAN, limit: format!("error: {msg}"), pass: false });
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|c| !c.pass).count()
    }
}
