use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use selfprop_core::{RigidMotion, Vec3};
use selfprop_fem::assemble::{assemble_stokes, deformation_energy, stokes_action};
use selfprop_fem::norms::integrate;
use selfprop_fem::solver::OseenSolver;
use selfprop_fem::space::MixedSpace;
use selfprop_fem::{assemble_oseen, Tag, TetMesh};

fn motion() -> RigidMotion {
    RigidMotion::new(Vec3::new(0.3, -0.2, 0.1), Vec3::new(0.2, 0.5, -0.4))
}

fn random_velocity(space: &MixedSpace, seed: u64, zero_trace: bool) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; space.n_dofs()];
    for n in 0..space.n_nodes() {
        if zero_trace && space.node_tag[n].is_some() {
            continue;
        }
        for c in 0..3 {
            x[3 * n + c] = rng.random_range(-1.0..1.0);
        }
    }
    x
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[test]
fn stokes_operator_is_symmetric() {
    let mesh = TetMesh::unit_cube(3).unwrap();
    let space = MixedSpace::new(&mesh);
    let k = assemble_oseen(&mesh, &space, &RigidMotion::zero()).k;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..3 {
        let a: Vec<f64> = (0..space.n_dofs()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..space.n_dofs()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lhs = dot(&b, &k.matvec(&a));
        let rhs = dot(&a, &k.matvec(&b));
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0), "{lhs} vs {rhs}");
    }
}

#[test]
fn quadratic_form_is_the_deformation_energy_plus_inflow_term() {
    let mesh = TetMesh::unit_cube(3).unwrap();
    let space = MixedSpace::new(&mesh);
    let m = motion();
    let k = assemble_oseen(&mesh, &space, &m).k;
    for (seed, zero_trace) in [(1, true), (2, false)] {
        let u = random_velocity(&space, seed, zero_trace);
        let form = dot(&u, &k.matvec(&u));
        let energy = deformation_energy(&mesh, &space, &u);
        // ½∮(V·ν)|u|² over the box faces, ν the outward normal
        let mut inflow = 0.0;
        for f in 0..space.bface_nodes.len() {
            let nodes = space.bface_nodes[f];
            let pts = [0, 1, 2].map(|i| space.node_pos[nodes[i]]);
            for q in selfprop_core::quadrature::triangle_deg7() {
                let phi = selfprop_core::trace::p2_tri(&q.bary);
                let x = q.bary[0] * pts[0] + q.bary[1] * pts[1] + q.bary[2] * pts[2];
                let uq = (0..6).fold(Vec3::zeros(), |s, i| s + phi[i] * space.velocity(&u, nodes[i]));
                inflow += 0.5 * q.weight * space.bface_area[f] * m.velocity(&x).dot(&space.bface_normal[f]) * uq.norm_squared();
            }
        }
        let defect = form - energy - inflow;
        assert!(defect.abs() < 1e-10 * energy, "zero_trace={zero_trace}: defect {defect:e}, energy {energy}");
        if zero_trace {
            assert!(inflow == 0.0);
        }
    }
}

#[test]
fn transport_and_coriolis_are_skew_on_zero_traces() {
    let mesh = TetMesh::unit_cube(3).unwrap();
    let space = MixedSpace::new(&mesh);
    let k = assemble_oseen(&mesh, &space, &motion()).k;
    let s = assemble_stokes(&mesh, &space);
    let w = random_velocity(&space, 3, true);
    let z = random_velocity(&space, 4, true);
    let b = |a: &[f64], c: &[f64]| dot(c, &k.matvec(a)) - dot(c, &s.matvec(a));
    let (bwz, bzw) = (b(&w, &z), b(&z, &w));
    assert!(bwz.abs() > 1e-3, "transport form vanished");
    assert!((bwz + bzw).abs() < 1e-12 * bwz.abs().max(1.0), "{bwz} vs {bzw}");
}

#[test]
fn stokes_action_matches_the_stokes_matrix_rows() {
    let mesh = TetMesh::unit_cube(2).unwrap();
    let space = MixedSpace::new(&mesh);
    let s = assemble_stokes(&mesh, &space);
    let mut x = random_velocity(&space, 9, false);
    let off = 3 * space.n_nodes();
    for v in 0..space.n_points {
        x[off + v] = (v as f64 * 0.37).sin();
    }
    let a = stokes_action(&mesh, &space, &x);
    let b = s.matvec(&x);
    for d in 0..space.n_velocity() {
        assert!((a[d] - b[d]).abs() < 1e-12, "row {d}: {} vs {}", a[d], b[d]);
    }
}

#[test]
fn zero_data_give_the_zero_solution() {
    let mesh = TetMesh::unit_cube(2).unwrap();
    let space = MixedSpace::new(&mesh);
    let op = assemble_oseen(&mesh, &space, &motion());
    let solver = OseenSolver::new(&mesh, &space, op).unwrap();
    let z = vec![0.0; space.n_dofs()];
    let x = solver.solve(&z, &z).unwrap();
    assert!(x.iter().all(|&v| v == 0.0));
    let y = solver.solve_transpose(&z, &z).unwrap();
    assert!(y.iter().all(|&v| v == 0.0));
}

#[test]
fn pressure_has_zero_mean_and_transpose_solve_is_reciprocal() {
    let mesh = TetMesh::unit_cube(3).unwrap();
    let space = MixedSpace::new(&mesh);
    let op = assemble_oseen(&mesh, &space, &motion());
    let solver = OseenSolver::new(&mesh, &space, op).unwrap();
    // two flux-free Dirichlet data sets: rigid fields
    let a = space.interpolate(|x| Vec3::new(1.0, 0.0, 0.0) + Vec3::z().cross(x), |_| 0.0);
    let b = space.interpolate(|x| Vec3::new(0.0, 0.5, 0.2) + Vec3::x().cross(x), |_| 0.0);
    let mask = |v: &[f64]| -> Vec<f64> {
        (0..v.len()).map(|d| if space.is_boundary_dof(d) { v[d] } else { 0.0 }).collect()
    };
    let z = vec![0.0; space.n_dofs()];
    let x = solver.solve(&mask(&a), &z).unwrap();
    let y = solver.solve_transpose(&mask(&b), &z).unwrap();
    let mean = integrate(&mesh, &space, &x, |_, _, _, p| p);
    assert!(mean.abs() < 1e-12, "pressure mean {mean}");
    // yᵀ K x evaluated through the boundary residuals of either problem
    let rx = solver.residual(&x, &z);
    let ry = solver.residual_transpose(&y, &z);
    let lhs: f64 = (0..space.n_velocity()).filter(|&d| space.is_boundary_dof(d)).map(|d| y[d] * rx[d]).sum();
    let rhs: f64 = (0..space.n_velocity()).filter(|&d| space.is_boundary_dof(d)).map(|d| x[d] * ry[d]).sum();
    assert!((lhs - rhs).abs() < 1e-9 * lhs.abs().max(1.0), "{lhs} vs {rhs}");
    assert!(space.node_tag.iter().filter(|t| **t == Some(Tag::Far)).count() > 0);
}
