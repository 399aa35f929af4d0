use selfprop_core::RigidMotion;
use selfprop_spectral::solve::rot_oseen_mode;
use selfprop_spectral::*;

fn tensor(seed: u64) -> ForcingPair {
    ForcingPair::random(seed, 2, 1.0, &["tensor"])
}

fn transverse(amp: Vec3) -> ForcingPair {
    ForcingPair::from_g(vec![GTerm::Gaussian { center: Vec3::new(0.2, -0.1, 0.3), width: 0.7, amp }])
}

#[test]
fn k_quantity_examples() {
    let m = RigidMotion::new(Vec3::z(), Vec3::z());
    assert!((k_quantity(1.0, 1.0, 1.0, 0.0, &m).unwrap() - 15.0).abs() < 1e-14);
    assert!((k_quantity(2.0, 2.0, 2.0, 0.0, &m).unwrap() - 30.0).abs() < 1e-13);
    // ξ ∥ ω: no |ω×ξ| contribution
    let m = RigidMotion::new(Vec3::new(0.0, 0.0, 4.0), Vec3::new(0.0, 0.0, 4.0));
    let pre = 1.0 + 4f64.powf(-0.25) + 16f64.sqrt() / 4.0;
    let k = k_quantity(1.0, 0.0, 0.0, 0.0, &m).unwrap();
    assert!((k - pre * 9.0).abs() < 1e-13);
    assert!(k_quantity(1.0, 1.0, 1.0, 0.0, &RigidMotion::translation(Vec3::x())).is_err());
}

/// For constant transverse forcing the time integral has the closed form
/// `P φ` with `φ = ½(0, α₋J₊ + α₊J₋, iα₋J₊ − iα₊J₋)`.
#[test]
fn constant_transverse_forcing_closed_form() {
    let (r, w) = (0.5, 1.3);
    let g0 = Vec3::new(0.0, 0.7, -0.4);
    let f = ForcingPair::from_g(vec![GTerm::Gaussian { center: Vec3::zeros(), width: 1e-3, amp: g0 }]);
    // a tiny bump is constant in ζ to within (1e-3 |ζ|)²
    let scale = (2.0 * std::f64::consts::PI * 1e-6).powf(1.5);
    let i = Complex64::i();
    for z in [Vec3::new(0.3, 0.2, -0.4), Vec3::new(-0.05, 0.01, 0.02), Vec3::new(0.6, -0.5, 0.1)] {
        let v = rot_oseen_mode(&z, r, w, &f, &TimeQuad::default()).unwrap().value / Complex64::new(scale, 0.0);
        let z2 = z.norm_squared();
        let jp = 1.0 / Complex64::new(z2, -(r * z.x + w));
        let jm = 1.0 / Complex64::new(z2, -(r * z.x - w));
        let (ap, am) = (g0.y + i * g0.z, g0.y - i * g0.z);
        let phi = CVec3::new(Complex64::new(0.0, 0.0), (am * jp + ap * jm) * 0.5, (i * am * jp - i * ap * jm) * 0.5);
        let exact = solve::leray(&z, &phi);
        assert!((v - exact).norm() < 1e-6 * exact.norm(), "{z:?}: {v:?} vs {exact:?}");
    }
}

#[test]
fn compatibility_enforced() {
    let grid = SpectralGrid::new(8.0, 16).unwrap();
    let opts = L2Options::default();
    let g = transverse(Vec3::x());
    assert!(matches!(l2_bound_check(&grid, &g, &RigidMotion::zero(), &opts), Err(SpectralError::Precondition(_))));
    assert!(l2_bound_check(&grid, &g, &RigidMotion::new(Vec3::zeros(), Vec3::x()), &opts).is_err());
    assert!(l2_bound_check(&grid, &g, &RigidMotion::new(Vec3::zeros(), Vec3::z()), &opts).is_ok());
}

#[test]
fn g_only_constant_stable_across_resolutions() {
    let f = tensor(21);
    let mut ratios = Vec::new();
    for n in [32, 48, 64] {
        let grid = SpectralGrid::new(8.0, n).unwrap();
        let rep = l2_bound_check(&grid, &f, &RigidMotion::zero(), &L2Options::default()).unwrap();
        eprintln!("N {n}: {rep:?}");
        ratios.push(rep.ratio);
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    assert!(hi / lo < 1.05, "{ratios:?}");
}

#[test]
fn transverse_mean_scaling() {
    let grid = SpectralGrid::new(8.0, 32).unwrap();
    let f = transverse(Vec3::y());
    let mut pts = Vec::new();
    for w in [0.25, 1.0, 4.0] {
        let rep = l2_bound_check(&grid, &f, &RigidMotion::new(Vec3::zeros(), Vec3::x() * w), &L2Options::default()).unwrap();
        eprintln!("w {w}: v {:.4e} I1 {:.4e} I2 {:.3e} I3 {:.3e} high {:.3e} rhs {:.3e} ratio {:.3}", rep.v_norm, rep.i1, rep.i2, rep.i3, rep.high, rep.rhs, rep.ratio);
        pts.push((w, rep.v_norm));
    }
}
