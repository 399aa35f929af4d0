//! The eight pipeline commands. Each writes its artifacts under the output
//! directory and returns the summary lines printed on success.

use std::fmt::Write as _;

use selfprop_control::basis::{basis_to_bytes, cache_key};
use selfprop_control::optimizer::{optimize, project_ball, random_probes, OptimizeOptions, Termination};
use selfprop_control::{ControlError, FlowState, Problem};
use selfprop_core::{RigidMotion, TraceField, Vec3};
use selfprop_fem::io::{load_mesh, mesh_hash, write_vtk};
use selfprop_fem::mesh::MIN_DIHEDRAL_DEG;
use selfprop_fem::FarRule;
use selfprop_spectral::solve::rot_oseen_mode;
use selfprop_spectral::{
    forcing_lattice, jpm_integral, oseen_fourier_solve, oseen_residual, rot_residual, Complex64, CVec3, ForcingPair, GTerm,
    SpectralGrid, TimeQuad,
};
use serde_json::json;

use crate::checks::{audit_control, derivative_study, directions, gradient_study, rel, Checks};
use crate::config::RunConfig;
use crate::context::{ensure_dir, Context};
use crate::error::{CliError, Result};
use crate::output::{num, save_json, vec_json, write_trace, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Mesh,
    Basis,
    State,
    Linearize,
    Adjoint,
    Optimize,
    Oracle,
    Verify,
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Vec<String>> {
    ensure_dir(&cfg.output)?;
    selfprop_fem::io::write_atomic(&cfg.output.join("effective.conf"), cfg.to_text().as_bytes())?;
    match cmd {
        Command::Mesh => mesh(cfg),
        Command::Basis => basis(cfg),
        Command::State => state(cfg),
        Command::Linearize => linearize(cfg),
        Command::Adjoint => adjoint(cfg),
        Command::Optimize => optimize_cmd(cfg),
        Command::Oracle => oracle(cfg),
        Command::Verify => verify(cfg),
    }
}

fn mesh(cfg: &RunConfig) -> Result<Vec<String>> {
    let ctx = Context::new(cfg)?;
    let m = ctx.disc.mesh();
    let min_dihedral = m.min_dihedral().into_iter().fold(f64::INFINITY, f64::min);
    write_vtk(&ctx.out("mesh.vtk"), m, &ctx.disc.space, &ctx.disc.zeros())?;
    save_json(
        &ctx.out("mesh.json"),
        &json!({
            "key": ctx.mesh_key,
            "content_hash": mesh_hash(&ctx.disc.ext),
            "points": m.n_points(),
            "tetrahedra": m.n_tets(),
            "body_triangles": ctx.disc.body().surface.triangles.len(),
            "surface_nodes": ctx.disc.surface.n_nodes(),
            "dofs": ctx.disc.n_dofs(),
            "volume": m.volume(),
            "min_dihedral_deg": min_dihedral,
            "r_far": cfg.r_far,
            "h": cfg.h,
        }),
    )?;
    Ok(vec![
        format!("mesh {} ({})", &ctx.mesh_key[..16], if ctx.mesh_cached { "cached" } else { "built" }),
        format!("{} points, {} tetrahedra, {} dofs, min dihedral {min_dihedral:.2}°", m.n_points(), m.n_tets(), ctx.disc.n_dofs()),
    ])
}

fn basis(cfg: &RunConfig) -> Result<Vec<String>> {
    let ctx = Context::new(cfg)?;
    let (p, cached) = ctx.problem()?;
    let b = &p.basis;
    let mut t = Table::new(&["row", "c0", "c1", "c2", "c3", "c4", "c5"])?;
    for i in 0..6 {
        let mut r = vec![i.to_string()];
        r.extend((0..6).map(|j| num(b.a[(i, j)])));
        t.row(r)?;
    }
    t.save(&ctx.out("basis_A.csv"))?;
    let gram = b.gram_min_eigenvalue(&ctx.disc);
    let key = cache_key(&ctx.disc, &cfg.motion(), cfg.kind);
    save_json(
        &ctx.out("basis.json"),
        &json!({
            "key": key,
            "kind": cfg.kind.name(),
            "xi": vec_json(&cfg.xi),
            "omega": vec_json(&cfg.omega),
            "cond": b.cond,
            "gram_min_eigenvalue": gram,
        }),
    )?;
    Ok(vec![
        format!("basis {} ({})", &key[..16], if cached { "cached" } else { "built" }),
        format!("cond(A) = {:.4e}, smallest Gram eigenvalue {gram:.4e}", b.cond),
    ])
}

fn state_json(p: &Problem, st: &FlowState, v: &TraceField) -> serde_json::Value {
    let r = &st.residuals;
    json!({
        "drag": p.drag(st),
        "boundary_work": p.boundary_work(st),
        "iterations": st.iterations(),
        "max_ratio": st.max_ratio(),
        "alpha": vec_json(&st.alpha()),
        "beta": vec_json(&st.beta()),
        "scale": p.scale(v),
        "residuals": {
            "momentum": r.momentum,
            "force_balance": r.force_balance,
            "torque_balance": r.torque_balance,
            "net_force": vec_json(&r.net_force),
            "flux": r.flux,
        },
    })
}

fn increments_table(st: &FlowState) -> Result<Table> {
    let mut t = Table::new(&["iteration", "increment", "ratio"])?;
    for (i, inc) in st.increments.iter().enumerate() {
        let ratio = if i == 0 { String::new() } else { num(st.ratios.get(i - 1).copied().unwrap_or(f64::NAN)) };
        t.row([(i + 1).to_string(), num(*inc), ratio])?;
    }
    Ok(t)
}

/// Diagnostics written when a solve fails.
fn write_failure(ctx: &Context, stem: &str, e: &CliError, extra: serde_json::Value) -> Result<()> {
    save_json(&ctx.out(&format!("{stem}_failure.json")), &json!({ "class": e.class(), "exit_code": e.code(), "message": e.to_string(), "details": extra }))
}

fn control_error_details(e: &ControlError) -> serde_json::Value {
    match e {
        ControlError::NonContraction { what, ratios } => json!({ "stage": what, "ratios": ratios }),
        ControlError::MaxIterations { what, iterations, last } => json!({ "stage": what, "iterations": iterations, "last_increment": last }),
        ControlError::SingularCorrector { cond } => json!({ "cond": cond }),
        _ => json!(null),
    }
}

fn state(cfg: &RunConfig) -> Result<Vec<String>> {
    let ctx = Context::new(cfg)?;
    let (p, _) = ctx.problem()?;
    let v = ctx.control()?;
    let st = match p.solve_state(&v) {
        Ok(s) => s,
        Err(e) => {
            let details = control_error_details(&e);
            let e = CliError::from(e);
            write_failure(&ctx, "state", &e, json!({ "control_norm": p.surface().surrogate().norm(&v.values), "solver": details }))?;
            return Err(e);
        }
    };
    save_json(&ctx.out("state.json"), &state_json(&p, &st, &v))?;
    increments_table(&st)?.save(&ctx.out("state_increments.csv"))?;
    write_vtk(&ctx.out("state.vtk"), ctx.disc.mesh(), &ctx.disc.space, &st.x)?;
    let r = &st.residuals;
    Ok(vec![
        format!("J = {:.10e}, boundary work {:.10e}", p.drag(&st), p.boundary_work(&st)),
        format!("{} Picard iterations, largest ratio {:.3e}", st.iterations(), st.max_ratio()),
        format!("force/torque balance {:.3e} / {:.3e}, |N| = {:.3e}", r.force_balance, r.torque_balance, r.net_force.norm()),
    ])
}

/// Problem with the tight inner tolerance used by difference quotients.
pub fn tight<'a>(ctx: &'a Context) -> Result<Problem<'a>> {
    let (mut p, _) = ctx.problem()?;
    p.opts.tol = p.opts.tol.min(1e-13);
    p.opts.max_iter = p.opts.max_iter.max(100);
    Ok(p)
}

fn linearize(cfg: &RunConfig) -> Result<Vec<String>> {
    let ctx = Context::new(cfg)?;
    let p = tight(&ctx)?;
    let v = ctx.control()?;
    let delta = &directions(p.surface(), cfg.kind, 1, cfg.seed)[0];
    let steps: Vec<f64> = [10.0, 1.0, 0.1].iter().map(|s| s * cfg.fd_step).collect();
    let study = derivative_study(&p, &v, delta, &steps)?;
    let mut t = Table::new(&["step", "relative_error", "slope"])?;
    let mut lines = vec!["step        FD error    slope".to_string()];
    for (i, (h, e)) in study.steps.iter().zip(&study.errors).enumerate() {
        let slope = if i == 0 { String::new() } else { num(study.slopes[i - 1]) };
        t.row([num(*h), num(*e), slope.clone()])?;
        lines.push(format!("{h:<11.1e} {e:<11.4e} {}", if i == 0 { "-".into() } else { format!("{:.3}", study.slopes[i - 1]) }));
    }
    t.save(&ctx.out("linearize.csv"))?;
    lines.push(format!("fitted log-log slope {:.4}", study.fitted));
    Ok(lines)
}

fn adjoint(cfg: &RunConfig) -> Result<Vec<String>> {
    let ctx = Context::new(cfg)?;
    let p = tight(&ctx)?;
    let v = ctx.control()?;
    let st = p.solve_state(&v)?;
    let adj = p.solve_adjoint(&st)?;
    let closure = p.closure_residuals(&st, &adj);
    let dirs = directions(p.surface(), cfg.kind, cfg.fd_directions, cfg.seed);
    let (g, rows) = gradient_study(&p, &v, &dirs, cfg.fd_step)?;
    write_trace(&ctx.out("gradient.trace"), &g)?;
    let mut t = Table::new(&["direction", "central_difference", "adjoint", "linearized", "relative_error"])?;
    for (i, r) in rows.iter().enumerate() {
        t.row([i.to_string(), num(r.fd), num(r.adjoint), num(r.linearized), num(r.fd_error())])?;
    }
    t.save(&ctx.out("adjoint_fd.csv"))?;
    let worst = rows.iter().map(|r| r.fd_error()).fold(0.0, f64::max);
    save_json(
        &ctx.out("adjoint.json"),
        &json!({
            "drag": p.drag(&st),
            "ell": vec_json(&adj.ell()),
            "k": vec_json(&adj.k()),
            "adjoint_increments": adj.increments,
            "closure_residuals": closure,
            "gradient_l2": p.surface().inner(&g.values, &g.values).sqrt(),
            "worst_fd_error": worst,
        }),
    )?;
    Ok(vec![
        format!("J = {:.10e}, {} adjoint iterations", p.drag(&st), adj.increments.len()),
        format!("gradient vs central differences: worst relative error {worst:.3e} over {} directions", rows.len()),
    ])
}

fn optimize_cmd(cfg: &RunConfig) -> Result<Vec<String>> {
    let ctx = Context::new(cfg)?;
    let (p, _) = ctx.problem()?;
    let v0 = ctx.control()?;
    let opts = OptimizeOptions {
        kappa: cfg.kappa,
        tol: cfg.opt_tol,
        max_iter: cfg.opt_max_iter,
        armijo: cfg.armijo,
        shrink: cfg.shrink,
        max_backtracks: cfg.max_backtracks,
        n_random_probes: cfg.probes,
        seed: cfg.seed,
        step_rule: cfg.step_rule,
    };
    let run = optimize(&p, &v0, &opts)?;
    let dir = ctx.out("optimize");
    ensure_dir(&dir.join("iterates"))?;
    for (k, it) in run.iterates.iter().enumerate() {
        write_trace(&dir.join("iterates").join(format!("iter_{k:04}.trace")), it)?;
    }
    let mut t = Table::new(&["iteration", "drag", "stationarity", "gradient_norm", "step", "active"])?;
    for k in 0..run.j.len() {
        let step = if k == 0 { String::new() } else { num(run.steps[k - 1]) };
        t.row([k.to_string(), num(run.j[k]), num(run.stationarity[k]), num(run.riesz_norm[k]), step, run.active[k].to_string()])?;
    }
    t.save(&dir.join("history.csv"))?;
    let last = run.j.len().saturating_sub(1);
    let termination = match &run.termination {
        Termination::Stationary => "stationary".to_string(),
        Termination::MaxIterations => "max-iterations".to_string(),
        Termination::LineSearchFailed => "line-search-failed".to_string(),
        Termination::InnerSolver(m) => format!("inner-solver: {m}"),
    };
    let orthogonality = run.orthogonality_residual();
    save_json(
        &dir.join("summary.json"),
        &json!({
            "termination": termination,
            "iterations": last,
            "initial_drag": run.j.first(),
            "final_drag": run.j.last(),
            "final_stationarity": run.stationarity.last(),
            "scale": run.scale,
            "final_active": run.active.last(),
            "interior_orthogonality": orthogonality,
            "kappa": cfg.kappa,
        }),
    )?;
    if let Some(v) = run.iterates.last() {
        write_trace(&dir.join("final.trace"), v)?;
    }
    let summary = vec![
        format!("{termination} after {last} iterations"),
        format!("J: {:.8e} -> {:.8e}", run.j.first().copied().unwrap_or(f64::NAN), run.j.last().copied().unwrap_or(f64::NAN)),
        format!("stationarity {:.3e} (tolerance {:.3e})", run.stationarity.last().copied().unwrap_or(f64::NAN), cfg.opt_tol * run.scale),
    ];
    match run.termination {
        Termination::Stationary => Ok(summary),
        Termination::MaxIterations => Err(CliError::MaxIterations(format!("optimizer stopped at the iteration limit ({last} iterations)"))),
        _ => Err(CliError::Optimizer(termination)),
    }
}

/// Sweep of the low-frequency integrals: `(|ω|, ℛ, unit-ball value, bound,
/// unit-ball ratio, whole-space value)`.
pub fn jpm_sweep() -> Result<Vec<(f64, f64, f64, f64, f64, f64)>> {
    let mut out = Vec::new();
    for w in [0.1, 0.5, 1.0, 4.0, 10.0] {
        for r in [0.0, 0.5, 2.0, 5.0] {
            let v = jpm_integral(r, w)?;
            out.push((w, r, v.plus.max(v.minus), v.bound, v.ratio(), v.full_plus.max(v.full_minus)));
        }
    }
    Ok(out)
}

/// Forcing of the oracle residual checks: smooth and compactly concentrated.
pub fn oracle_forcing() -> ForcingPair {
    ForcingPair::random(7, 2, 1.5, &["gaussian", "tensor"])
}

fn oracle(cfg: &RunConfig) -> Result<Vec<String>> {
    ensure_dir(&cfg.output)?;
    let sweep = jpm_sweep()?;
    let mut t = Table::new(&["omega", "r", "ball_value", "whole_value", "bound", "ball_ratio", "whole_ratio"])?;
    for (w, r, v, b, q, full) in &sweep {
        t.row([num(*w), num(*r), num(*v), num(*full), num(*b), num(*q), num(full / b)])?;
    }
    t.save(&cfg.output.join("oracle_jpm.csv"))?;
    let (lo, hi) = sweep.iter().fold((f64::INFINITY, 0.0f64), |(a, b), s| (a.min(s.5 / s.3), b.max(s.5 / s.3)));
    let grid = SpectralGrid::new(8.0, cfg.oracle_grid)?;
    let f = oracle_forcing();
    let fh = forcing_lattice(&grid, &f);
    let xi = Vec3::new(0.8, -0.3, 0.2);
    let oseen = oseen_residual(&grid, &fh, &xi, &oseen_fourier_solve(&grid, &fh, &xi));
    let rot = rot_residual(&grid, &f, 0.5, 1.0, &TimeQuad::default())?;
    let mut t = Table::new(&["solver", "grid", "relative_residual"])?;
    t.row(["oseen".to_string(), cfg.oracle_grid.to_string(), num(oseen)])?;
    t.row(["rotating_oseen".to_string(), cfg.oracle_grid.to_string(), num(rot)])?;
    t.save(&cfg.output.join("oracle_residuals.csv"))?;
    save_json(
        &cfg.output.join("oracle.json"),
        &json!({ "fitted_constant": hi, "ratio_min": lo, "ratio_max": hi, "spread": hi / lo, "oseen_residual": oseen, "rotating_residual": rot, "grid": cfg.oracle_grid }),
    )?;
    Ok(vec![
        format!("J± whole-space ratios in [{lo:.4}, {hi:.4}], spread {:.3}", hi / lo),
        format!("residuals on {}³: Oseen {oseen:.3e}, rotating {rot:.3e}", cfg.oracle_grid),
    ])
}

/// Worst relative mismatch of the rotating solver against the closed form
/// for `e₁`-directed axisymmetric forcing.
pub fn axisymmetric_mismatch(w: f64) -> Result<f64> {
    let f = ForcingPair::from_g(vec![
        GTerm::Gaussian { center: Vec3::new(0.4, 0.0, 0.0), width: 0.7, amp: Vec3::x() },
        GTerm::Gaussian { center: Vec3::new(-0.5, 0.0, 0.0), width: 0.5, amp: -0.6 * Vec3::x() },
    ]);
    let r = 0.7;
    let mut worst: f64 = 0.0;
    for z in [Vec3::new(0.1, 0.2, -0.05), Vec3::new(-1.0, 0.4, 0.8), Vec3::new(2.0, -3.0, 1.0), Vec3::new(0.0, 0.02, 0.01)] {
        let got = rot_oseen_mode(&z, r, w, &f, &TimeQuad::default())?.value;
        let phi = f.f_hat(&z).x;
        let z2 = z.norm_squared();
        let dir = Vec3::x() - z * (z.x / z2);
        let exact = CVec3::new(phi * dir.x, phi * dir.y, phi * dir.z) / Complex64::new(z2, -r * z.x);
        worst = worst.max((got - exact).norm() / exact.norm());
    }
    Ok(worst)
}

fn verify_suite(ctx: &Context, c: &mut Checks) -> Result<()> {
    let cfg = &ctx.cfg;
    let d = &ctx.disc;
    let s = &d.surface;
    // mesh
    let q = d.mesh().min_dihedral().into_iter().fold(f64::INFINITY, f64::min);
    c.at_most("mesh", "min dihedral deficit (deg)", MIN_DIHEDRAL_DEG - q, 0.0);
    c.holds("mesh", "every surface triangle is a body face", d.ext.body_faces.len() == d.body().surface.triangles.len());
    c.holds("mesh", "cache reload has the same content hash", mesh_hash(&load_mesh(&ctx.mesh_path)?) == mesh_hash(&d.ext));
    // discretization
    let stokes = d.factor(&RigidMotion::zero())?;
    let rigid = RigidMotion::new(Vec3::new(0.3, -1.0, 0.5), Vec3::new(0.7, 0.1, -0.4));
    let x = d.space.interpolate(|p| rigid.velocity(p), |_| 0.0);
    c.at_most("fem", "traction of a rigid field", d.boundary_traction(&stokes, &x, &d.zeros()).max_abs(), 1e-10);
    let x = d.space.interpolate(|_| Vec3::zeros(), |_| 2.5);
    let g = d.boundary_traction(&stokes, &x, &d.zeros());
    c.at_most("fem", "constant pressure resultant", s.integral(&g.values).norm() + s.moment(&g.values).norm(), 1e-10);
    let tr = s.sample(|p| Vec3::new(0.3, 0.0, 0.1) + 0.5 * p);
    c.at_most("fem", "flux template closure", rel(d.far.body_flux(&tr), s.flux_exact(&tr)), 1e-11);
    let tang = s.project_tangential(&s.sample(|p| Vec3::new(1.0, 0.2, 0.0) + Vec3::new(0.0, 0.0, 0.4).cross(p)));
    let flux = d.far.body_flux(&tang);
    c.holds("fem", "homogeneous far rule rejects fluxes", d.dirichlet_with(&tr, FarRule::Homogeneous).is_err());
    c.at_most("fem", "flux of a tangential trace (relative)", flux.abs() / (s.area() * tang.iter().map(|v| v.norm()).fold(0.0, f64::max)), 0.05);
    // corrector basis
    let (p, _) = ctx.problem()?;
    let b = &p.basis;
    c.at_most("basis", "cond(A)", b.cond, 1e8);
    c.holds("basis", "corrector fields are admissible", b.fields.iter().all(|f| f.check(s).is_ok()));
    let r = nalgebra::Vector6::new(1.0, -2.0, 0.5, 0.3, 0.0, -1.0);
    c.at_most("basis", "A solve residual", (b.a * b.solve(&r) - r).norm() / r.norm(), 1e-10);
    let key = cache_key(d, &cfg.motion(), cfg.kind);
    let on_disk = std::fs::read(ctx.basis_path(&key))?;
    c.holds("basis", "cache reload is byte-identical", on_disk == basis_to_bytes(b, &key));
    // state
    let v = ctx.control()?;
    let scale = p.scale(&v);
    match p.solve_state(&v) {
        Ok(st) => {
            let r = &st.residuals;
            c.at_most("state", "largest contraction ratio", st.max_ratio(), 1.0 - 1e-12);
            c.at_most("state", "force balance / scale", r.force_balance / scale, 1e-7);
            c.at_most("state", "torque balance / scale", r.torque_balance / scale, 1e-7);
            c.at_most("state", "net force |N| / scale", r.net_force.norm() / scale, 1e-7);
            c.at_most("state", "energy identity (relative)", rel(p.boundary_work(&st), p.drag(&st)), 0.02);
            c.at_most("state", "flux / scale", r.flux.abs() / scale, 1e-10);
        }
        Err(e) => c.error("state", "state solve", &e.to_string()),
    }
    // derivatives
    let p = tight(ctx)?;
    let base = audit_control(s, cfg.kind, 2.0);
    let delta = &directions(s, cfg.kind, 1, cfg.seed)[0];
    match derivative_study(&p, &base, delta, &[1e-2, 1e-3, 1e-4]) {
        Ok(st) => {
            for (i, sl) in st.slopes.iter().enumerate() {
                c.within("linearize", format!("FD slope {}", i + 1), *sl, 0.8, 1.2);
            }
        }
        Err(e) => c.error("linearize", "FD study", &e.to_string()),
    }
    let base = audit_control(s, cfg.kind, 0.05);
    match gradient_study(&p, &base, &directions(s, cfg.kind, cfg.fd_directions, cfg.seed + 1), cfg.fd_step) {
        Ok((g, rows)) => {
            for (i, r) in rows.iter().enumerate() {
                c.at_most("adjoint", format!("central difference, direction {i}"), r.fd_error(), 1e-3);
                c.at_most("adjoint", format!("linearized derivative, direction {i}"), r.linearized_error(), 1e-4);
            }
            c.holds("adjoint", "gradient is admissible", g.check(s).is_ok());
        }
        Err(e) => c.error("adjoint", "gradient study", &e.to_string()),
    }
    // optimizer primitives
    let probe = &random_probes(s, cfg.kind, 1.0, 1, cfg.seed)[0];
    let big = probe.scaled(10.0 * cfg.kappa / s.surrogate().norm(&probe.values).max(1e-300));
    let once = project_ball(s, &big, cfg.kappa);
    let twice = project_ball(s, &once, cfg.kappa);
    c.at_most("optimizer", "projection lands on the ball (relative)", (s.surrogate().norm(&once.values) - cfg.kappa).abs() / cfg.kappa, 1e-12);
    c.at_most("optimizer", "projection idempotence", once.values.iter().zip(&twice.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max), 1e-14);
    // spectral oracle
    let grid = SpectralGrid::new(8.0, 16)?;
    let f = oracle_forcing();
    let fh = forcing_lattice(&grid, &f);
    let xi = Vec3::new(0.8, -0.3, 0.2);
    c.at_most("spectral", "Oseen residual on 16³", oseen_residual(&grid, &fh, &xi, &oseen_fourier_solve(&grid, &fh, &xi)), 1e-10);
    c.at_most("spectral", "axisymmetric closed form at |ω| = 1", axisymmetric_mismatch(1.0)?, 1e-8);
    // splitting the radial integral at √|ω|/(2ℛ) gives the explicit
    // constant: whole-space value ≤ 2π²/√|ω| + 8πℛ/|ω| ≤ 8π·bound
    let worst = jpm_sweep()?.iter().map(|s| s.5 / s.3).fold(0.0, f64::max);
    c.at_most("spectral", "J± whole-space value / bound", worst, 8.0 * std::f64::consts::PI);
    Ok(())
}

/// Invariant suite; writes `verify.csv` and fails if any check fails.
pub fn verify(cfg: &RunConfig) -> Result<Vec<String>> {
    let ctx = Context::new(cfg)?;
    let mut c = Checks::default();
    if let Err(e) = verify_suite(&ctx, &mut c) {
        c.error("verify", "suite aborted", &e.to_string());
    }
    let mut t = Table::new(&["suite", "check", "value", "limit", "pass"])?;
    let mut lines = Vec::new();
    for r in &c.rows {
        t.row([r.suite.to_string(), r.name.clone(), num(r.value), r.limit.clone(), r.pass.to_string()])?;
        let mut l = String::new();
        let _ = write!(l, "{} {:<10} {:<48} {:>12.4e} {}", if r.pass { "ok  " } else { "FAIL" }, r.suite, r.name, r.value, r.limit);
        lines.push(l);
    }
    t.save(&ctx.out("verify.csv"))?;
    match c.failures() {
        0 => {
            lines.push(format!("all {} checks passed", c.rows.len()));
            Ok(lines)
        }
        n => {
            for l in &lines {
                eprintln!("{l}");
            }
            Err(CliError::VerifyFailed(n))
        }
    }
}

