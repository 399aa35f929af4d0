use selfprop_spectral::jpm_integral;
use std::f64::consts::{PI, SQRT_2};

/// Closed-form antiderivative of ρ²/(ρ⁴+1).
fn antiderivative(x: f64) -> f64 {
    let s = SQRT_2;
    (((x * x - s * x + 1.0) / (x * x + s * x + 1.0)).ln() + 2.0 * (s * x + 1.0).atan() + 2.0 * (s * x - 1.0).atan())
        / (4.0 * s)
}

#[test]
fn radial_oracle_antiderivative() {
    // independent check of the oracle itself: total mass π/(2√2)
    let total = antiderivative(1e8) - antiderivative(0.0);
    assert!((total - PI / (2.0 * SQRT_2)).abs() < 1e-7);
}

#[test]
fn zero_r_matches_scaled_radial_integral() {
    for w in [0.1, 0.5, 1.0, 4.0, 10.0] {
        let v = jpm_integral(0.0, w).unwrap();
        let cut = w.powf(-0.5);
        let exact = w.powf(-0.5) * 4.0 * PI * (antiderivative(cut) - antiderivative(0.0));
        assert!((v.plus - exact).abs() < 1e-9 * exact, "{w}: {} {exact}", v.plus);
        assert!((v.minus - v.plus).abs() < 1e-12 * exact);
        let full = SQRT_2 * PI * PI / w.sqrt();
        assert!((v.full_plus - full).abs() < 1e-9 * full, "{} {full}", v.full_plus);
    }
}

#[test]
fn scaling_and_monotonicity() {
    let a = jpm_integral(0.0, 4.0).unwrap();
    let b = jpm_integral(0.0, 1.0).unwrap();
    assert!(a.full_plus / b.full_plus <= 0.5 * (1.0 + 1e-9));
    let mut last = f64::INFINITY;
    for w in [0.1, 0.5, 1.0, 4.0, 10.0] {
        let v = jpm_integral(0.0, w).unwrap().plus;
        assert!(v <= last);
        last = v;
    }
}

#[test]
fn growth_in_r_at_most_linear() {
    let w = 1.0;
    let base = jpm_integral(0.0, w).unwrap();
    for r in [1.0, 4.0, 16.0, 64.0] {
        let v = jpm_integral(r, w).unwrap();
        assert!(v.full_plus <= base.full_plus * (1.0 + r / w), "{r}: {}", v.full_plus);
    }
}

#[test]
fn sweep_table() {
    for w in [0.1, 0.5, 1.0, 4.0, 10.0] {
        for r in [0.0, 0.5, 2.0, 5.0] {
            let v = jpm_integral(r, w).unwrap();
            eprintln!("w {w:5} r {r:4} ball {:.4e} full {:.4e} bound {:.4e} ratio {:.4} full_ratio {:.4}", v.plus, v.full_plus, v.bound, v.ratio(), v.full_ratio());
        }
    }
}
