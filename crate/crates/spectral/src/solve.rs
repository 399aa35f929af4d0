use crate::{c, rot_e1, to_c, CVec3, Complex64, ForcingPair, Result, SpectralError, SpectralGrid, Vec3};
use rayon::prelude::*;
use selfprop_core::quadrature::gauss_jacobi01;
use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Time-quadrature controls for the rotating kernel.
///
/// The integrand `e^{−at} O(|ω|t)ᵀ P(O(|ω|t)ζ) f̂(O(|ω|t)ζ)` with
/// `a = |ζ|² − iℛζ₁` is a decaying exponential times a `2π/|ω|`-periodic
/// function. Two rules are used:
///
/// * when the decay is fast against the oscillation (phase advance per
///   e-fold `β ≤ laguerre_beta`), Gauss–Laguerre in `|ζ|²t`, with the error
///   estimated against a lower-order Laguerre rule;
/// * otherwise the half line is folded exactly onto one period,
///   `∫₀^∞ = (1 − e^{−aT})⁻¹ ∫₀^T`, split into Gauss–Legendre panels sized
///   to the oscillation, with a Richardson estimate from halving the panels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeQuad {
    /// Points per panel.
    pub order: usize,
    /// Phase advance (radians) allotted to one panel of the fine rule.
    pub panel_phase: f64,
    /// Largest phase advance per e-fold handled by the Laguerre rule.
    pub laguerre_beta: f64,
    /// Relative tolerance on the estimated error.
    pub tol: f64,
    pub max_panels: usize,
}

impl Default for TimeQuad {
    fn default() -> Self {
        Self { order: 10, panel_phase: 2.5, laguerre_beta: 0.5, tol: 1e-9, max_panels: 1 << 16 }
    }
}

const LAGUERRE_HI: usize = 20;
const LAGUERRE_LO: usize = 14;

/// Gauss–Laguerre nodes and weights for `∫₀^∞ e^{−x} h(x) dx` (Golub–Welsch).
pub fn gauss_laguerre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        j[(k, k)] = (2 * k + 1) as f64;
        if k + 1 < n {
            j[(k, k + 1)] = (k + 1) as f64;
            j[(k + 1, k)] = (k + 1) as f64;
        }
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> =
        (0..n).map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2))).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

fn laguerre_rules() -> &'static [(Vec<f64>, Vec<f64>); 2] {
    static RULES: OnceLock<[(Vec<f64>, Vec<f64>); 2]> = OnceLock::new();
    RULES.get_or_init(|| [gauss_laguerre(LAGUERRE_HI), gauss_laguerre(LAGUERRE_LO)])
}

/// `I − ζζᵀ/|ζ|²` applied to `f`.
pub fn leray(z: &Vec3, f: &CVec3) -> CVec3 {
    let zc = to_c(z);
    let dot = zc.x * f.x + zc.y * f.y + zc.z * f.z;
    f - zc * (dot / z.norm_squared())
}

/// Pressure transform `p̂ = −iζ·f̂/|ζ|²` from the gradient part of `f̂`.
pub fn leray_pressure(z: &Vec3, f: &CVec3) -> Complex64 {
    let dot = f.x * z.x + f.y * z.y + f.z * z.z;
    -Complex64::i() * dot / z.norm_squared()
}

/// One mode of the non-rotating solution, `(|ζ|² − iξ·ζ)⁻¹ P f̂`.
pub fn oseen_mode(z: &Vec3, xi: &Vec3, f: &CVec3) -> CVec3 {
    let z2 = z.norm_squared();
    if z2 == 0.0 {
        return CVec3::zeros();
    }
    leray(z, f) / Complex64::new(z2, -xi.dot(z))
}

/// Non-rotating solve on the lattice; the zero mode and Nyquist modes are
/// set to zero.
pub fn oseen_fourier_solve(grid: &SpectralGrid, f_hat: &[CVec3], xi: &Vec3) -> Vec<CVec3> {
    (0..grid.len())
        .map(|i| if grid.is_nyquist(i) { CVec3::zeros() } else { oseen_mode(&grid.zeta(i), xi, &f_hat[i]) })
        .collect()
}

/// Pointwise value of the rotating solution and its estimated error.
#[derive(Debug, Clone, Copy)]
pub struct ModeValue {
    pub value: CVec3,
    pub error: f64,
    pub panels: usize,
}

/// The rotating solution at a single (arbitrary) wavenumber.
pub fn rot_oseen_mode(z: &Vec3, r: f64, w: f64, f: &ForcingPair, quad: &TimeQuad) -> Result<ModeValue> {
    rot_mode_with(z, r, w, f.phase_radius(), &|eta| f.f_hat(eta), quad)
}

pub(crate) fn rot_mode_with(
    z: &Vec3,
    r: f64,
    w: f64,
    radius: f64,
    f_hat: &dyn Fn(&Vec3) -> CVec3,
    quad: &TimeQuad,
) -> Result<ModeValue> {
    if w <= crate::OMEGA_THRESHOLD {
        return Err(SpectralError::OmegaBelowThreshold(w));
    }
    let z2 = z.norm_squared();
    if z2 == 0.0 {
        return Ok(ModeValue { value: CVec3::zeros(), error: 0.0, panels: 0 });
    }
    let a = Complex64::new(z2, -r * z.x);
    let zperp = z.y.hypot(z.z);
    // harmonics in wt: one from Oᵀ, two from the rotated projector, and the
    // phase of f̂ along the orbit
    let osc = w * (3.0 + zperp * radius) + (r * z.x).abs();
    // rotated, projected forcing pulled back to the mode frame
    let pulled = |t: f64| -> CVec3 {
        let o = rot_e1(w * t);
        let eta = o * z;
        o.transpose().map(c) * leray(&eta, &f_hat(&eta))
    };
    let accept = |value: CVec3, error: f64, abs: f64, panels: usize| {
        if error > quad.tol * value.norm() + 1e-14 * abs {
            Err(SpectralError::Quadrature { zeta: [z.x, z.y, z.z], estimate: error, tol: quad.tol * value.norm() })
        } else {
            Ok(ModeValue { value, error, panels })
        }
    };
    if osc <= quad.laguerre_beta * z2 {
        // x = |ζ|²t; the residual phase e^{iℛζ₁t} stays in the integrand
        let run = |(nodes, weights): &(Vec<f64>, Vec<f64>)| -> (CVec3, f64) {
            let mut sum = CVec3::zeros();
            let mut abs = 0.0;
            for (x, wt) in nodes.iter().zip(weights) {
                let t = x / z2;
                let val = pulled(t) * (Complex64::from_polar(wt / z2, r * z.x * t));
                abs += val.norm();
                sum += val;
            }
            (sum, abs)
        };
        let [hi, lo] = laguerre_rules();
        let (fine, abs) = run(hi);
        let (rough, _) = run(lo);
        return accept(fine, (fine - rough).norm(), abs, 1);
    }
    let period = 2.0 * PI / w;
    // past e^{-40} the remaining tail is negligible
    let (t_end, fold) = if z2 * period > 40.0 {
        (40.0 / z2, c(1.0))
    } else {
        (period, 1.0 / (1.0 - (-a * period).exp()))
    };
    let rate = osc + z2;
    let coarse = ((t_end * rate / (2.0 * quad.panel_phase)).ceil() as usize).max(1);
    if 2 * coarse > quad.max_panels {
        return Err(SpectralError::Quadrature { zeta: [z.x, z.y, z.z], estimate: f64::INFINITY, tol: quad.tol });
    }
    let rule = gauss_jacobi01(quad.order, 0);
    let run = |panels: usize| -> (CVec3, f64) {
        let h = t_end / panels as f64;
        let mut sum = CVec3::zeros();
        let mut abs = 0.0;
        for p in 0..panels {
            for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
                let t = h * (p as f64 + x);
                let val = pulled(t) * ((-a * t).exp() * (wt * h));
                abs += val.norm();
                sum += val;
            }
        }
        (sum * fold, abs * fold.norm())
    };
    let (fine, abs) = run(2 * coarse);
    let (rough, _) = run(coarse);
    // halving the panels multiplies a Gauss error by ~2^{-2·order}; keep a
    // margin of 2^{order} against pre-asymptotic behaviour
    let error = (fine - rough).norm() / 2f64.powi(quad.order as i32);
    accept(fine, error, abs, 2 * coarse)
}

/// Lattice output of the rotating solver.
#[derive(Debug, Clone)]
pub struct RotSolution {
    pub v_hat: Vec<CVec3>,
    /// Largest estimated quadrature error over all modes.
    pub max_error: f64,
    pub total_panels: usize,
}

/// Rotating solve on the lattice for forcing given in the Mozzi–Chasles
/// frame; zero and Nyquist modes are set to zero.
pub fn rot_oseen_fourier_solve(grid: &SpectralGrid, f: &ForcingPair, r: f64, w: f64, quad: &TimeQuad) -> Result<RotSolution> {
    let modes: Vec<ModeValue> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            if grid.is_nyquist(i) {
                Ok(ModeValue { value: CVec3::zeros(), error: 0.0, panels: 0 })
            } else {
                rot_oseen_mode(&grid.zeta(i), r, w, f, quad)
            }
        })
        .collect::<Result<_>>()?;
    Ok(RotSolution {
        max_error: modes.iter().map(|m| m.error).fold(0.0, f64::max),
        total_panels: modes.iter().map(|m| m.panels).sum(),
        v_hat: modes.into_iter().map(|m| m.value).collect(),
    })
}

/// Fourier-side residual of the rotating system at one mode,
/// `a v̂ − |ω|[(e₁×ζ)·∇_ζ v̂ − e₁×v̂] + iζp̂ − f̂`, with the orbit derivative
/// taken by sixth-order central differences of the pointwise solver.
pub fn rot_residual_mode(z: &Vec3, r: f64, w: f64, f: &ForcingPair, quad: &TimeQuad) -> Result<CVec3> {
    let z2 = z.norm_squared();
    if z2 == 0.0 {
        return Ok(CVec3::zeros());
    }
    let fz = f.f_hat(z);
    let v = rot_oseen_mode(z, r, w, f, quad)?.value;
    let kappa = 1.0 + z.y.hypot(z.z) * f.radius() + (r * z.x).abs() / w;
    let d = 0.1 / kappa;
    let at = |s: f64| rot_oseen_mode(&(rot_e1(s) * z), r, w, f, quad).map(|m| m.value);
    let coef = [(1.0, 3.0 / 4.0), (2.0, -3.0 / 20.0), (3.0, 1.0 / 60.0)];
    let mut dv = CVec3::zeros();
    for (k, ck) in coef {
        dv += (at(k * d)? - at(-k * d)?) * c(ck / d);
    }
    let e1_cross_v = CVec3::new(c(0.0), -v.z, v.y);
    let a = Complex64::new(z2, -r * z.x);
    let p = leray_pressure(z, &fz);
    Ok(v * a - (dv - e1_cross_v) * c(w) + to_c(z) * (Complex64::i() * p) - fz)
}

/// Fourier-side residual of the non-rotating system at one mode.
pub fn oseen_residual_mode(z: &Vec3, xi: &Vec3, f: &CVec3, v: &CVec3) -> CVec3 {
    let z2 = z.norm_squared();
    if z2 == 0.0 {
        return CVec3::zeros();
    }
    let p = leray_pressure(z, f);
    v * Complex64::new(z2, -xi.dot(z)) + to_c(z) * (Complex64::i() * p) - f
}

/// Lattice transform of the forcing with Nyquist modes removed.
pub fn forcing_lattice(grid: &SpectralGrid, f: &ForcingPair) -> Vec<CVec3> {
    (0..grid.len())
        .into_par_iter()
        .map(|i| if grid.is_nyquist(i) { CVec3::zeros() } else { f.f_hat(&grid.zeta(i)) })
        .collect()
}

fn max_norm(v: &[CVec3]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Physical-space residual of the rotating system relative to `max|f|`.
pub fn rot_residual(grid: &SpectralGrid, f: &ForcingPair, r: f64, w: f64, quad: &TimeQuad) -> Result<f64> {
    let res: Vec<CVec3> = (0..grid.len())
        .into_par_iter()
        .map(|i| if grid.is_nyquist(i) { Ok(CVec3::zeros()) } else { rot_residual_mode(&grid.zeta(i), r, w, f, quad) })
        .collect::<Result<_>>()?;
    let fphys = grid.to_physical(&forcing_lattice(grid, f));
    Ok(max_norm(&grid.to_physical(&res)) / max_norm(&fphys))
}

/// Physical-space residual of the non-rotating system relative to `max|f|`.
pub fn oseen_residual(grid: &SpectralGrid, f_hat: &[CVec3], xi: &Vec3, v_hat: &[CVec3]) -> f64 {
    let res: Vec<CVec3> = (0..grid.len())
        .map(|i| if grid.is_nyquist(i) { CVec3::zeros() } else { oseen_residual_mode(&grid.zeta(i), xi, &f_hat[i], &v_hat[i]) })
        .collect();
    max_norm(&grid.to_physical(&res)) / max_norm(&grid.to_physical(f_hat))
}

/// Rotating solution of the original system (body frame, velocity
/// `ξ + ω×x`) at one wavenumber, via the given Mozzi–Chasles frame:
/// `v̂(ζ) = Mᵀ e^{−iζ·c} v̂_y(Mζ)` with the forcing moved into the frame.
pub fn body_frame_mode(
    z: &Vec3,
    frame: &crate::MozziChaslesFrame,
    forcing_in_frame: &ForcingPair,
    quad: &TimeQuad,
) -> Result<CVec3> {
    let vy = rot_oseen_mode(&(frame.m * z), frame.r, frame.omega_norm, forcing_in_frame, quad)?.value;
    Ok(frame.m.transpose().map(c) * vy * Complex64::from_polar(1.0, -z.dot(&frame.shift)))
}
