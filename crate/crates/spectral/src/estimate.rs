use crate::solve::{oseen_mode, rot_mode_with, TimeQuad};
use crate::{mozzi_chasles, to_c, CVec3, Complex64, ForcingPair, Result, SpectralError, SpectralGrid, Vec3, OMEGA_THRESHOLD};
use rayon::prelude::*;
use selfprop_core::quadrature::gauss_legendre;
use selfprop_core::RigidMotion;
use std::f64::consts::PI;

/// Forcing norms entering the right-hand sides of the whole-space estimates,
/// measured in the frame where the estimate is stated.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Norms {
    pub g_l1: f64,
    /// `|∫g|`
    pub g_mean: f64,
    pub big_g_l2: f64,
    pub y_big_g_l2: f64,
    /// `‖|y|g‖_s`
    pub y_g_ls: f64,
}

/// Outcome of an L² audit: the measured norm, its frequency decomposition,
/// and the estimate's right-hand side with all constants set to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L2Report {
    pub rotating: bool,
    /// `‖v‖₂`
    pub v_norm: f64,
    /// `|ζ| ≥ 1` contribution to `‖v‖₂`.
    pub high: f64,
    /// `|ζ| < 1` contribution to `‖v‖₂`.
    pub low: f64,
    /// Low-frequency parts driven by `ĝ(0)`, `ĝ − ĝ(0)` and `iĜζ`.
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub norms: Norms,
    /// Prefactor of `|∫g|` (zero when ω = 0).
    pub mean_weight: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Parameters of the audit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L2Options {
    /// Exponent `s ∈ [1, 6/5)` of the weighted `g` norm.
    pub s: f64,
    /// Relative tolerance of the compatibility condition.
    pub compat_tol: f64,
    pub quad: TimeQuad,
}

impl Default for L2Options {
    fn default() -> Self {
        Self { s: 1.0, compat_tol: 1e-8, quad: TimeQuad::default() }
    }
}

/// `K(u, q, F, ξ, ω, Φ)` for `ω ≠ 0`.
pub fn k_quantity(grad_u: f64, q: f64, big_f: f64, flux: f64, motion: &RigidMotion) -> Result<f64> {
    let w = motion.omega.norm();
    if w <= OMEGA_THRESHOLD {
        return Err(SpectralError::OmegaBelowThreshold(w));
    }
    let xi = motion.xi;
    let pre = 1.0 + w.powf(-0.25) + motion.omega.dot(&xi).abs().sqrt() / w + motion.omega.cross(&xi).norm() / (w * w);
    let bracket = (1.0 + xi.norm() + w) * (grad_u + flux.abs()) + q + big_f;
    Ok(pre * bracket)
}

fn norms(grid: &SpectralGrid, f: &ForcingPair, s: f64) -> Norms {
    let dv = grid.dx().powi(3);
    let (mut g1, mut gg, mut ygg, mut ygs) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..grid.len() {
        let y = grid.point(i);
        let r = y.norm();
        let g = f.g_at(&y).norm();
        let big = f.big_g_at(&y).norm_squared();
        g1 += g;
        gg += big;
        ygg += r * r * big;
        ygs += (r * g).powf(s);
    }
    Norms {
        g_l1: g1 * dv,
        g_mean: f.integral_g().norm(),
        big_g_l2: (gg * dv).sqrt(),
        y_big_g_l2: (ygg * dv).sqrt(),
        y_g_ls: (ygs * dv).powf(1.0 / s),
    }
}

/// Audits the whole-space L² estimate for `f = g + div G` and the given
/// motion: `ω = 0` uses the non-rotating formula, otherwise the forcing is
/// moved to the Mozzi–Chasles frame first.
///
/// The high-frequency part is a lattice sum over `|ζ| ≥ 1`; the low part is
/// a graded spherical product rule on the unit ball, where the three pieces
/// of the forcing are solved separately.
pub fn l2_bound_check(grid: &SpectralGrid, forcing: &ForcingPair, motion: &RigidMotion, opts: &L2Options) -> Result<L2Report> {
    let w = motion.omega.norm();
    let rotating = w > OMEGA_THRESHOLD;
    let (f, r) = if rotating {
        let frame = mozzi_chasles(motion)?;
        (forcing.in_frame(&frame), frame.r)
    } else {
        (forcing.clone(), 0.0)
    };
    if f.radius() > grid.l {
        return Err(SpectralError::Precondition(format!(
            "forcing extends to radius {:.3} beyond the box half-length {}",
            f.radius(),
            grid.l
        )));
    }
    let nm = norms(grid, &f, opts.s);
    let mean = f.integral_g();
    let violated = if rotating { mean.x.abs() } else { mean.norm() };
    if violated > opts.compat_tol * nm.g_l1.max(f64::MIN_POSITIVE) {
        let which = if rotating { "e₁·∫g = 0 in the Mozzi–Chasles frame" } else { "∫g = 0" };
        return Err(SpectralError::Precondition(format!("compatibility {which} violated: {violated:.3e}")));
    }
    let xi = motion.xi;
    let radius = f.phase_radius();
    let quad = opts.quad;
    let solve = |z: &Vec3, fh: &dyn Fn(&Vec3) -> CVec3| -> Result<CVec3> {
        if rotating {
            rot_mode_with(z, r, w, radius, fh, &quad).map(|m| m.value)
        } else {
            Ok(oseen_mode(z, &xi, &fh(z)))
        }
    };

    // high frequencies on the lattice
    let dz3 = grid.dzeta().powi(3);
    let high_sq: f64 = (0..grid.len())
        .into_par_iter()
        .filter(|&i| !grid.is_nyquist(i) && grid.zeta(i).norm() >= 1.0)
        .map(|i| solve(&grid.zeta(i), &|eta| f.f_hat(eta)).map(|v| v.norm_squared() * dz3))
        .collect::<Result<Vec<f64>>>()?
        .iter()
        .sum();

    // low frequencies: graded radial panels × Gauss in μ × trapezoid in φ
    let g0 = to_c(&mean);
    let radial: Vec<(f64, f64)> = (0..12)
        .flat_map(|k| {
            let (a, b) = if k == 11 { (0.0, 0.5f64.powi(10)) } else { (0.5f64.powi(k + 1), 0.5f64.powi(k)) };
            let rule = gauss_legendre(6, a, b);
            rule.nodes.into_iter().zip(rule.weights)
        })
        .collect();
    let mu = gauss_legendre(12, -1.0, 1.0);
    let nphi = 16;
    let points: Vec<(Vec3, f64)> = radial
        .iter()
        .flat_map(|&(rho, wr)| {
            let mu = &mu;
            (0..mu.nodes.len()).flat_map(move |a| {
                (0..nphi).map(move |b| {
                    let (m, wm) = (mu.nodes[a], mu.weights[a]);
                    let phi = 2.0 * PI * b as f64 / nphi as f64;
                    let st = (1.0 - m * m).sqrt();
                    let z = Vec3::new(m, st * phi.cos(), st * phi.sin()) * rho;
                    (z, rho * rho * wr * wm * 2.0 * PI / nphi as f64)
                })
            })
        })
        .collect();
    let i = Complex64::i();
    let low: Vec<[f64; 4]> = points
        .par_iter()
        .map(|(z, wt)| {
            let v1 = solve(z, &|_| g0)?;
            let v2 = solve(z, &|eta| f.g_hat(eta) - g0)?;
            let v3 = solve(z, &|eta| f.big_g_hat(eta) * to_c(eta) * i)?;
            let tot = v1 + v2 + v3;
            Ok([v1.norm_squared() * wt, v2.norm_squared() * wt, v3.norm_squared() * wt, tot.norm_squared() * wt])
        })
        .collect::<Result<_>>()?;
    let sum = |k: usize| low.iter().map(|l| l[k]).sum::<f64>();
    // Plancherel normalisation (2π)^{-3}
    let norm = |x: f64| (x / (2.0 * PI).powi(3)).sqrt();
    let (high, low_total) = (norm(high_sq), norm(sum(3)));
    let v_norm = high.hypot(low_total);
    let mean_weight = if rotating { w.powf(-0.25) + r.abs().sqrt() / w.sqrt() } else { 0.0 };
    let rhs = mean_weight * nm.g_mean + nm.g_l1 + nm.big_g_l2 + nm.y_big_g_l2 + nm.y_g_ls;
    Ok(L2Report {
        rotating,
        v_norm,
        high,
        low: low_total,
        i1: norm(sum(0)),
        i2: norm(sum(1)),
        i3: norm(sum(2)),
        norms: nm,
        mean_weight,
        rhs,
        ratio: v_norm / rhs,
    })
}
