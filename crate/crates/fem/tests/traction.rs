use std::f64::consts::PI;
use std::sync::OnceLock;

use proptest::prelude::*;
use selfprop_core::{BodyGeometry, RigidMotion, Surface, Vec3};
use selfprop_fem::assemble::assemble_stokes;
use selfprop_fem::mesh::Tag;
use selfprop_fem::solver::OseenSolver;
use selfprop_fem::{Discretization, FarRule, OseenOperator};

fn disc() -> &'static Discretization {
    static D: OnceLock<Discretization> = OnceLock::new();
    D.get_or_init(|| {
        let body = BodyGeometry::new(Surface::icosphere(1, 1.0)).unwrap();
        Discretization::new(&body, 8.0, 0.5).unwrap()
    })
}

fn stokes_solver(d: &Discretization) -> OseenSolver {
    let op = OseenOperator { motion: RigidMotion::zero(), k: assemble_stokes(d.mesh(), &d.space) };
    OseenSolver::new(d.mesh(), &d.space, op).unwrap()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[test]
fn rigid_field_without_pressure_has_no_traction() {
    let d = disc();
    let s = stokes_solver(d);
    let rigid = RigidMotion::new(Vec3::new(0.3, -1.0, 0.5), Vec3::new(0.7, 0.1, -0.4));
    let x = d.space.interpolate(|p| rigid.velocity(p), |_| 0.0);
    let g = d.boundary_traction(&s, &x, &d.zeros());
    assert!(g.max_abs() < 1e-10, "{}", g.max_abs());
}

#[test]
fn constant_pressure_gives_normal_traction_with_zero_resultant() {
    let d = disc();
    let s = stokes_solver(d);
    let c = 2.5;
    let x = d.space.interpolate(|_| Vec3::zeros(), |_| c);
    let g = d.boundary_traction(&s, &x, &d.zeros());
    assert!(d.surface.integral(&g.values).norm() < 1e-10);
    assert!(d.surface.moment(&g.values).norm() < 1e-10);
    // ∮ g·n = −c |∂B| with the face normals
    let gn = d.surface.flux_exact(&g.values);
    let want = -c * d.surface.area();
    assert!((gn - want).abs() < 0.05 * want.abs(), "{gn} vs {want}");
}

#[test]
fn traction_resultants_equal_the_residual_pairings() {
    let d = disc();
    let motion = RigidMotion::new(Vec3::new(0.0, 0.0, 0.6), Vec3::new(0.0, 0.3, 0.0));
    let s = d.factor(&motion).unwrap();
    let load = d.zeros();
    let trace = d.surface.sample(|p| Vec3::new(1.0, 0.2, 0.0) + Vec3::new(0.0, 0.0, 0.4).cross(p));
    let x = d.solve_dirichlet(&s, &trace, FarRule::Homogeneous, &load).unwrap();
    let g = d.boundary_traction(&s, &x, &load);
    let r = s.residual(&x, &load);
    let f = d.surface.integral(&g.values);
    for i in 0..3 {
        // ∮ σn·e_i + ∮ (V·n)(u·e_i), both read from the residual on the body rows
        let mut e = vec![Vec3::zeros(); d.surface.n_nodes()];
        e.iter_mut().for_each(|v| v[i] = 1.0);
        let body: f64 = d.space.body_functional(&r).iter().zip(&e).map(|(a, b)| a.dot(b)).sum();
        let conv: Vec3 = d.surface.qps().iter().fold(Vec3::zeros(), |acc, q| {
            acc + q.w * motion.velocity(&q.x).dot(&d.surface.face_normals[q.face]) * d.surface.interp(&trace, q)
        });
        assert!((body - f[i] - conv[i]).abs() < 1e-8 * body.abs().max(1.0), "component {i}: {body} vs {} + {}", f[i], conv[i]);
    }
}

#[test]
fn stokes_drag_on_the_coarse_sphere_is_in_the_expected_range() {
    let d = disc();
    let s = d.factor(&RigidMotion::zero()).unwrap();
    let z = d.zeros();
    let x = d.solve_dirichlet(&s, &d.surface.sample(|_| Vec3::x()), FarRule::Homogeneous, &z).unwrap();
    let f = d.surface.integral(&d.boundary_traction(&s, &x, &z).values);
    let x = d.solve_dirichlet(&s, &d.surface.sample(|p| Vec3::x().cross(p)), FarRule::Homogeneous, &z).unwrap();
    let m = d.surface.moment(&d.boundary_traction(&s, &x, &z).values);
    println!("force/6π = {:.4}, torque/8π = {:.4}", f.x / (6.0 * PI), m.x / (8.0 * PI));
    // the bounded container raises the drag; a polyhedral body lowers it
    assert!(f.x > 0.9 * 6.0 * PI && f.x < 1.6 * 6.0 * PI, "{f:?}");
    assert!(f.y.abs() < 1e-2 * f.x && f.z.abs() < 1e-2 * f.x);
    assert!(m.x > 0.85 * 8.0 * PI && m.x < 1.15 * 8.0 * PI, "{m:?}");
}

#[test]
fn flux_template_closes_the_total_flux() {
    let d = disc();
    let trace = d.surface.sample(|p| Vec3::new(0.3, 0.0, 0.1) + 0.5 * p);
    let body = d.far.body_flux(&trace);
    assert!(body.abs() > 1.0);
    assert!((body - d.surface.flux_exact(&trace)).abs() < 1e-11 * body.abs());
    // outward flux through the far faces, by face quadrature
    let x = d.dirichlet(&trace);
    let mut far = 0.0;
    for f in 0..d.space.bface_nodes.len() {
        if d.space.bface_tag[f] != Tag::Far {
            continue;
        }
        let nodes = d.space.bface_nodes[f];
        for q in selfprop_core::quadrature::triangle_deg7() {
            let phi = selfprop_core::trace::p2_tri(&q.bary);
            let u = (0..6).fold(Vec3::zeros(), |s, i| s + phi[i] * d.space.velocity(&x, nodes[i]));
            far += q.weight * d.space.bface_area[f] * u.dot(&d.space.bface_normal[f]);
        }
    }
    // domain-outward flux on the body is the body flux with n into the body
    assert!((body + far).abs() < 1e-11 * body.abs(), "{body} + {far}");
    assert!(d.dirichlet_with(&trace, FarRule::Homogeneous).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pull_back_is_the_transpose_of_the_far_extension(seed in 0u64..1000) {
        use rand::{Rng, SeedableRng};
        let d = disc();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let trace: Vec<Vec3> = (0..d.surface.n_nodes())
            .map(|_| Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let r: Vec<f64> = (0..d.n_dofs()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lhs = dot(&r, &d.dirichlet(&trace));
        let rhs: f64 = d.far.pull_back(&d.space, &r).iter().zip(&trace).map(|(a, b)| a.dot(b)).sum();
        prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn tangential_traces_carry_almost_no_flux(seed in 0u64..1000) {
        use rand::{Rng, SeedableRng};
        let d = disc();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let w = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let raw = d.surface.sample(|p| a + w.cross(p) + p * a.dot(p));
        let t = d.surface.project_tangential(&raw);
        let scale = d.surface.area() * t.iter().map(|v| v.norm()).fold(0.0, f64::max);
        // the nodal normals differ from the face normals only at O(h)
        prop_assert!(d.far.body_flux(&t).abs() < 0.05 * scale.max(1e-12));
    }
}
