mod common;

use common::{fixture, smooth_control, sphere, swim};
use proptest::prelude::*;
use selfprop_control::optimizer::{optimize, project_ball, random_probes, riesz_gradient, stationarity_residual, OptimizeOptions, Termination};
use selfprop_control::Problem;
use selfprop_core::{RigidMotion, SurfaceSpace, TraceField, TraceKind, Vec3};

const KINDS: [TraceKind; 2] = [TraceKind::Tangential, TraceKind::Localized];

/// Nodal functional `δ ↦ ⟨v, δ⟩` of the surrogate inner product.
fn surrogate_functional(s: &SurfaceSpace, v: &[Vec3]) -> Vec<Vec3> {
    let n = &s.surrogate().n;
    (0..v.len()).map(|a| (0..v.len()).fold(Vec3::zeros(), |acc, b| acc + n[(a, b)] * v[b])).collect()
}

#[test]
fn projection_examples() {
    let s = &sphere().surface;
    let kappa = 0.1;
    let v = smooth_control(sphere(), TraceKind::Tangential, [0.3, 0.1, -0.2, 0.5, 0.4, -0.1], 1.0);
    let n = s.surrogate().norm(&v.values);
    let half = v.scaled(0.5 * kappa / n);
    assert_eq!(project_ball(s, &half, kappa), half);
    let far = v.scaled(2.0 * kappa / n);
    let p = project_ball(s, &far, kappa);
    assert!((s.surrogate().norm(&p.values) - kappa).abs() < 1e-14);
    let cos = s.surrogate().inner(&p.values, &far.values) / (kappa * 2.0 * kappa);
    assert!((cos - 1.0).abs() < 1e-12);
    let zero = TraceField::zeros(s.n_nodes(), TraceKind::Tangential);
    assert_eq!(project_ball(s, &zero, kappa), zero);
}

#[test]
fn riesz_gradient_represents_the_density() {
    let d = sphere();
    let s = &d.surface;
    for kind in KINDS {
        let zero = riesz_gradient(s, &TraceField::zeros(s.n_nodes(), kind), kind).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
        // a rough density: alternating nodal values
        let g = TraceField::new(s.sample(|x| Vec3::new(x.x.signum(), (7.0 * x.y).sin(), x.z * x.x)), TraceKind::General);
        let r = riesz_gradient(s, &g, kind).unwrap();
        r.check(s).unwrap();
        let lhs = s.surrogate().inner(&r.values, &r.values);
        let rhs = s.inner(&g.values, &r.values);
        assert!(lhs.is_finite() && lhs > 0.0);
        assert!((lhs - rhs).abs() < 1e-10 * lhs, "{}: {lhs} vs {rhs}", kind.name());
        let delta = smooth_control(d, kind, [0.2, -0.3, 0.6, 0.1, -0.5, 0.4], 1.0);
        let a = s.surrogate().inner(&r.values, &delta.values);
        let b = s.inner(&g.values, &delta.values);
        assert!((a - b).abs() < 1e-10 * b.abs().max(1e-12));
    }
}

#[test]
fn stationarity_residual_examples() {
    let d = sphere();
    let s = &d.surface;
    let kind = TraceKind::Tangential;
    let kappa = 0.1;
    let probes = random_probes(s, kind, kappa, 8, 3);
    for p in &probes {
        p.check(s).unwrap();
        assert!(s.surrogate().norm(&p.values) <= kappa * (1.0 + 1e-12));
    }
    let v = smooth_control(d, kind, [0.3, 0.1, -0.2, 0.5, 0.4, -0.1], 1.0);
    let v = v.scaled(0.5 * kappa / s.surrogate().norm(&v.values));
    let zero = vec![Vec3::zeros(); s.n_nodes()];
    assert_eq!(stationarity_residual(&v, &zero, &probes), 0.0);
    // interior point with a nonzero gradient: the descent probe witnesses it
    let g = smooth_control(d, kind, [-0.4, 0.2, 0.1, 0.3, -0.2, 0.5], 1.0);
    let gf = surrogate_functional(s, &g.values);
    let eps = 0.01;
    let probe = v.axpy(-eps / s.surrogate().norm(&g.values), &g);
    let res = stationarity_residual(&v, &gf, &[probe]);
    assert!((res - eps * s.surrogate().norm(&g.values)).abs() < 1e-10 * res, "{res}");
    // on the sphere with the descent direction pointing outward the
    // variational inequality holds for every ball probe
    let vb = v.scaled(2.0);
    let outward: Vec<Vec3> = surrogate_functional(s, &vb.values).iter().map(|f| -f).collect();
    let mut all = probes.clone();
    all.extend(random_probes(s, kind, kappa, 16, 9).into_iter().map(|p| project_ball(s, &p.scaled(10.0), kappa)));
    assert_eq!(stationarity_residual(&vb, &outward, &all), 0.0);
}

#[test]
fn zero_motion_is_stationary_at_once() {
    let d = sphere();
    let p = Problem::new(d, &RigidMotion::zero(), TraceKind::Tangential).unwrap();
    let run = optimize(&p, &TraceField::zeros(d.surface.n_nodes(), TraceKind::Tangential), &OptimizeOptions::default()).unwrap();
    assert_eq!(run.termination, Termination::Stationary);
    assert!(run.steps.is_empty());
    assert_eq!(run.j, vec![0.0]);
    assert_eq!(run.stationarity, vec![0.0]);
}

#[test]
fn invalid_radius_is_rejected() {
    let d = sphere();
    let p = Problem::new(d, &swim(), TraceKind::Tangential).unwrap();
    let opts = OptimizeOptions { kappa: 0.0, ..Default::default() };
    assert!(optimize(&p, &TraceField::zeros(d.surface.n_nodes(), TraceKind::Tangential), &opts).is_err());
}

#[test]
fn swimming_sphere_optimizer_fixture() {
    let d = fixture();
    let p = Problem::new(d, &swim(), TraceKind::Tangential).unwrap();
    let opts = OptimizeOptions::default();
    let run = optimize(&p, &TraceField::zeros(d.surface.n_nodes(), TraceKind::Tangential), &opts).unwrap();
    println!("termination {:?}, J {:?}, stationarity {:?}, steps {:?}, active {:?}", run.termination, run.j, run.stationarity, run.steps, run.active);
    assert_eq!(run.termination, Termination::Stationary);
    assert!((run.j[0] - 0.785110377036).abs() < 1e-8);
    let sur = d.surface.surrogate();
    for k in 0..run.steps.len() {
        let (a, b) = (&run.iterates[k], &run.iterates[k + 1]);
        let step: Vec<Vec3> = b.values.iter().zip(&a.values).map(|(x, y)| x - y).collect();
        let bound = run.j[k] - opts.armijo / run.steps[k] * sur.inner(&step, &step);
        assert!(run.j[k + 1] <= bound, "step {k}");
        assert!(run.j[k + 1] < run.j[k]);
    }
    for v in &run.iterates {
        assert_eq!(v.kind, TraceKind::Tangential);
        v.check(&d.surface).unwrap();
        assert!(sur.norm(&v.values) <= opts.kappa * (1.0 + 1e-12));
    }
    assert!(*run.stationarity.last().unwrap() <= opts.tol * run.scale);
    assert!(run.j.last().unwrap() <= &run.j[0]);
    assert!(!run.is_interior());
    let st = run.final_state.as_ref().unwrap();
    assert!((p.drag(st) - run.j.last().unwrap()).abs() < 1e-12);
}

#[test]
fn interior_iterates_bracket_the_vi_residual_by_the_gradient_norm() {
    let d = sphere();
    let p = Problem::new(d, &swim(), TraceKind::Tangential).unwrap();
    let opts = OptimizeOptions { kappa: 2.0, max_iter: 4, ..Default::default() };
    let run = optimize(&p, &TraceField::zeros(d.surface.n_nodes(), TraceKind::Tangential), &opts).unwrap();
    assert_eq!(run.termination, Termination::MaxIterations);
    let sur = d.surface.surrogate();
    for k in 0..run.j.len() {
        assert!(!run.active[k]);
        let vn = sur.norm(&run.iterates[k].values);
        let (res, g) = (run.stationarity[k], run.riesz_norm[k]);
        // the probe −κ g/‖g‖ gives the lower bound, Cauchy–Schwarz the upper
        assert!(res >= (opts.kappa - vn) * g * (1.0 - 1e-9) && res <= 2.0 * opts.kappa * g * (1.0 + 1e-9), "iterate {k}: {res} vs {g}");
    }
    assert!(run.j.windows(2).all(|w| w[1] < w[0]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn projection_is_idempotent_and_lands_in_the_ball(c in prop::array::uniform6(-1.0f64..1.0), amp in 0.0f64..5.0, kappa in 0.01f64..2.0) {
        let d = sphere();
        let s = &d.surface;
        let v = smooth_control(d, TraceKind::Localized, c, amp);
        let p = project_ball(s, &v, kappa);
        prop_assert!(s.surrogate().norm(&p.values) <= kappa * (1.0 + 1e-12));
        let q = project_ball(s, &p, kappa);
        let diff = q.values.iter().zip(&p.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(diff <= 1e-14 * p.max_abs().max(1e-300));
        prop_assert_eq!(p.kind, TraceKind::Localized);
    }
}
