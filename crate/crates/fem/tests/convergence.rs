//! Manufactured-solution study on the unit cube.

use std::f64::consts::PI;

use selfprop_core::{RigidMotion, Vec3};
use selfprop_fem::assemble::load_vector;
use selfprop_fem::norms::integrate;
use selfprop_fem::solver::OseenSolver;
use selfprop_fem::space::MixedSpace;
use selfprop_fem::{assemble_oseen, TetMesh};

#[derive(Clone, Copy)]
enum F1 {
    S,
    C,
    G,
}

// value, first and second derivative
fn f1(k: F1, t: f64) -> [f64; 3] {
    match k {
        F1::S => [(PI * t).sin(), PI * (PI * t).cos(), -PI * PI * (PI * t).sin()],
        F1::C => [(PI * t).cos(), -PI * (PI * t).sin(), -PI * PI * (PI * t).cos()],
        F1::G => [1.0 + t * t, 2.0 * t, 2.0],
    }
}

// divergence-free field with vanishing normal component on the box faces
const TERMS: [(usize, f64, [F1; 3]); 6] = [
    (0, 1.0, [F1::S, F1::C, F1::G]),
    (1, -1.0, [F1::C, F1::S, F1::G]),
    (1, 1.0, [F1::G, F1::S, F1::C]),
    (2, -1.0, [F1::G, F1::C, F1::S]),
    (0, -1.0, [F1::S, F1::G, F1::C]),
    (2, 1.0, [F1::C, F1::G, F1::S]),
];
const PRESSURE: [F1; 3] = [F1::C, F1::S, F1::G];

struct Exact {
    u: Vec3,
    grad: nalgebra::Matrix3<f64>,
    lap: Vec3,
}

fn exact(x: &Vec3) -> Exact {
    let mut e = Exact { u: Vec3::zeros(), grad: nalgebra::Matrix3::zeros(), lap: Vec3::zeros() };
    for (c, coef, k) in TERMS {
        let v = [f1(k[0], x.x), f1(k[1], x.y), f1(k[2], x.z)];
        e.u[c] += coef * v[0][0] * v[1][0] * v[2][0];
        for j in 0..3 {
            let mut d = coef;
            let mut dd = coef;
            for a in 0..3 {
                d *= if a == j { v[a][1] } else { v[a][0] };
                dd *= if a == j { v[a][2] } else { v[a][0] };
            }
            e.grad[(c, j)] += d;
            e.lap[c] += dd;
        }
    }
    e
}

fn pressure(x: &Vec3) -> (f64, Vec3) {
    let v = [f1(PRESSURE[0], x.x), f1(PRESSURE[1], x.y), f1(PRESSURE[2], x.z)];
    let q = v[0][0] * v[1][0] * v[2][0];
    let g = Vec3::new(v[0][1] * v[1][0] * v[2][0], v[0][0] * v[1][1] * v[2][0], v[0][0] * v[1][0] * v[2][1]);
    (q, g)
}

fn motion() -> RigidMotion {
    RigidMotion::new(Vec3::new(0.4, 0.0, -0.3), Vec3::new(0.0, 0.5, 0.2))
}

fn velocity_error(n: usize) -> f64 {
    let m = motion();
    let mesh = TetMesh::unit_cube(n).unwrap();
    let space = MixedSpace::new(&mesh);
    let solver = OseenSolver::new(&mesh, &space, assemble_oseen(&mesh, &space, &m)).unwrap();
    // −Δu + ∇q − V·∇u + ω×u
    let load = load_vector(&mesh, &space, |x| {
        let e = exact(x);
        let (_, gq) = pressure(x);
        -e.lap + gq - e.grad * m.velocity(x) + m.omega.cross(&e.u)
    });
    let data = space.interpolate(|x| exact(x).u, |_| 0.0);
    let x = solver.solve(&data, &load).unwrap();
    integrate(&mesh, &space, &x, |xq, u, _, _| (u - exact(xq).u).norm_squared()).sqrt()
}

#[test]
fn manufactured_field_is_solenoidal_and_tangential() {
    for &x in &[Vec3::new(0.3, 0.7, 0.1), Vec3::new(0.9, 0.2, 0.55)] {
        assert!(exact(&x).grad.trace().abs() < 1e-12);
    }
    for &x in &[Vec3::new(0.0, 0.3, 0.8), Vec3::new(1.0, 0.6, 0.2)] {
        assert!(exact(&x).u.x.abs() < 1e-12);
    }
}

#[test]
fn manufactured_solution_converges_at_second_order_or_better() {
    let errs: Vec<f64> = [2, 4, 8].iter().map(|&n| velocity_error(n)).collect();
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    println!("L2 velocity errors {errs:?}, observed orders {orders:?}");
    assert!(orders.iter().all(|&o| o >= 1.9), "orders {orders:?}");
}
