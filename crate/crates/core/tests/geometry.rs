use std::f64::consts::PI;

use selfprop_core::{body_integrals, BodyGeometry, CoreError, Surface, SurfaceSpace, TraceField, TraceKind, Vec3};

#[test]
fn unit_ball_mass_and_inertia_match_analytic_values() {
    let s = Surface::icosphere(4, 1.0);
    let b = body_integrals(&s).unwrap();
    let m0 = 4.0 * PI / 3.0;
    let i0 = 8.0 * PI / 15.0;
    assert!((b.mass / m0 - 1.0).abs() < 0.01, "m = {}", b.mass);
    for i in 0..3 {
        for j in 0..3 {
            let expect = if i == j { i0 } else { 0.0 };
            assert!((b.inertia[(i, j)] - expect).abs() < 0.01 * i0, "I[{i}{j}] = {}", b.inertia[(i, j)]);
        }
    }
    assert!(b.centroid.norm() < 1e-14);
}

#[test]
fn moments_of_a_box_are_exact() {
    // axis-aligned box [-a,a]×[-b,b]×[-c,c] built from 12 triangles
    let (a, b, c) = (1.0, 0.5, 0.25);
    let v: Vec<Vec3> = (0..8)
        .map(|k| Vec3::new(if k & 1 == 0 { -a } else { a }, if k & 2 == 0 { -b } else { b }, if k & 4 == 0 { -c } else { c }))
        .collect();
    let quads = [[0, 2, 3, 1], [4, 5, 7, 6], [0, 1, 5, 4], [2, 6, 7, 3], [0, 4, 6, 2], [1, 3, 7, 5]];
    let mut tris = Vec::new();
    for q in quads {
        tris.push([q[0], q[1], q[2]]);
        tris.push([q[0], q[2], q[3]]);
    }
    let s = Surface::new(v, tris.clone(), vec![false; tris.len()]).unwrap();
    let bi = body_integrals(&s).unwrap();
    let m = 8.0 * a * b * c;
    assert!((bi.mass - m).abs() < 1e-14);
    let ixx = m / 3.0 * (b * b + c * c);
    let iyy = m / 3.0 * (a * a + c * c);
    let izz = m / 3.0 * (a * a + b * b);
    assert!((bi.inertia[(0, 0)] - ixx).abs() < 1e-14);
    assert!((bi.inertia[(1, 1)] - iyy).abs() < 1e-14);
    assert!((bi.inertia[(2, 2)] - izz).abs() < 1e-14);
    assert!(bi.inertia[(0, 1)].abs() < 1e-14);
}

#[test]
fn off_centre_body_fails_the_centroid_check() {
    let s = Surface::icosphere(2, 1.0).translated(Vec3::new(0.3, 0.0, 0.0));
    match BodyGeometry::new(s) {
        Err(CoreError::Centroid { offset, .. }) => assert!((offset - 0.3).abs() < 1e-12),
        other => panic!("expected centroid error, got {other:?}"),
    }
}

#[test]
fn translated_surface_keeps_mass() {
    let s = Surface::icosphere(2, 1.0);
    let a = body_integrals(&s).unwrap();
    let b = body_integrals(&s.translated(Vec3::new(0.2, -0.1, 0.4))).unwrap();
    assert!((a.mass - b.mass).abs() < 1e-13);
    assert!((b.centroid - Vec3::new(0.2, -0.1, 0.4)).norm() < 1e-13);
}

fn sphere_space(level: u32) -> (BodyGeometry, SurfaceSpace) {
    let body = BodyGeometry::new(Surface::icosphere(level, 1.0).with_gamma(|c| c.x > 0.3)).unwrap();
    let space = SurfaceSpace::new(&body);
    (body, space)
}

#[test]
fn boundary_quadrature_reproduces_polyhedral_area_and_gauss() {
    let (body, space) = sphere_space(2);
    let area: f64 = (0..body.surface.triangles.len()).map(|f| body.surface.outward_normal_area(f).1).sum();
    let ones = vec![Vec3::new(1.0, 0.0, 0.0); space.n_nodes()];
    assert!((space.integral(&ones).x - area).abs() < 1e-12);
    // mass matrix reproduces ∮1
    let m1: f64 = space.mass.matvec(&vec![1.0; space.n_nodes()]).iter().sum();
    assert!((m1 - area).abs() < 1e-12);
    // ∮ n = 0 on a closed surface; the exact-normal flux of a constant is 0
    assert!(space.flux_exact(&vec![Vec3::new(0.3, -1.0, 2.0); space.n_nodes()]).abs() < 1e-12);
    // flux of x through the surface, with n into the body, is −3·volume
    let xs = space.sample(|x| *x);
    let vol = body.mass;
    assert!((space.flux_exact(&xs) + 3.0 * vol).abs() < 1e-12);
}

#[test]
fn mass_solve_inverts_mass_apply() {
    let (_, space) = sphere_space(2);
    let v = space.sample(|x| Vec3::new(x.y * x.z, x.x.sin(), 1.0 + x.z));
    let back = space.mass_solve(&space.mass_apply(&v));
    let err = v.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err < 1e-11, "{err}");
}

#[test]
fn constrained_fields_satisfy_their_kind() {
    let (_, space) = sphere_space(2);
    let v = space.sample(|x| Vec3::new(1.0 + x.y, x.z * x.x, -x.y));
    let t = space.constrain(&v, TraceKind::Tangential);
    t.check(&space).unwrap();
    assert!(space.flux(&t.values).abs() < 1e-13);
    let l = space.constrain(&v, TraceKind::Localized);
    l.check(&space).unwrap();
    let bad = TraceField::new(v.clone(), TraceKind::Tangential);
    assert!(bad.check(&space).is_err());
    let bad = TraceField::new(v, TraceKind::Localized);
    assert!(bad.check(&space).is_err());
}

#[test]
fn surrogate_norm_scales_and_riesz_is_a_galerkin_identity() {
    let (_, space) = sphere_space(1);
    let sn = space.surrogate();
    let v = space.sample(|x| Vec3::new(x.x * x.y, 1.0, x.z));
    let n1 = sn.norm(&v);
    let n2 = sn.norm(&v.iter().map(|a| a * 2.0).collect::<Vec<_>>());
    assert!(n1 > 0.0 && (n2 - 2.0 * n1).abs() < 1e-12 * n1);
    // the norm dominates the L² norm
    assert!(n1 * n1 >= space.inner(&v, &v) - 1e-12);
    let functional = space.mass_apply(&space.sample(|x| Vec3::new(x.z, -x.x, x.y * x.y)));
    for kind in [TraceKind::General, TraceKind::Tangential, TraceKind::Localized] {
        let g = sn.riesz(&space, &functional, kind).unwrap();
        g.check(&space).unwrap();
        let lhs = sn.inner(&g.values, &g.values);
        let rhs: f64 = functional.iter().zip(&g.values).map(|(f, x)| f.dot(x)).sum();
        assert!((lhs - rhs).abs() < 1e-10 * rhs.abs().max(1.0), "{kind:?}: {lhs} vs {rhs}");
    }
}
