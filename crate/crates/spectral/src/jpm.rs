use crate::{Result, SpectralError};
use selfprop_core::quadrature::gauss_legendre;
use std::f64::consts::PI;

/// `∫|J±|²` over the unit ball and over all of ℝ³, with
/// `J± = 1/(|ζ|² − i(ℛζ₁ ± |ω|))`, and the bound `|ω|^{−1/2} + |ℛ|/|ω|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JpmValue {
    pub plus: f64,
    pub minus: f64,
    pub full_plus: f64,
    pub full_minus: f64,
    pub bound: f64,
}

impl JpmValue {
    /// `max(value±)/bound` on the unit ball.
    pub fn ratio(&self) -> f64 {
        self.plus.max(self.minus) / self.bound
    }

    /// `max(value±)/bound` for the whole-space integrals.
    pub fn full_ratio(&self) -> f64 {
        self.full_plus.max(self.full_minus) / self.bound
    }

    /// Checks `value± ≤ c·bound` on the unit ball.
    pub fn check(&self, c: f64) -> Result<()> {
        if self.ratio() > c {
            return Err(SpectralError::Precondition(format!(
                "J± integral {:.6e} exceeds {c}·bound = {:.6e}",
                self.plus.max(self.minus),
                c * self.bound
            )));
        }
        Ok(())
    }
}

/// Angular integral `∫_{−1}^{1} dμ / (ρ⁴ + (ℛρμ + s)²)`, closed form.
fn angular(rho: f64, r: f64, s: f64) -> f64 {
    let x = rho.powi(4) + s * s - r * r * rho * rho;
    let y = 2.0 * r * rho.powi(3);
    // atan(A) − atan(B) collapsed into one atan2 to avoid cancellation
    if y.abs() <= 1e-6 * x.abs() && x > 0.0 {
        let q = y / x;
        2.0 / x * (1.0 - q * q / 3.0 + q.powi(4) / 5.0)
    } else {
        2.0 * y.atan2(x) / y
    }
}

/// Radial density `2πρ² ∫dμ …`.
fn radial(rho: f64, r: f64, s: f64) -> f64 {
    2.0 * PI * rho * rho * angular(rho, r, s)
}

/// Adaptive Gauss–Legendre bisection to relative tolerance `tol`.
pub fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let rule = gauss_legendre(10, 0.0, 1.0);
    let gl = |a: f64, b: f64| -> f64 {
        rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * f(a + (b - a) * x)).sum::<f64>() * (b - a)
    };
    // seed with a uniform split so narrow peaks are not missed
    let n0 = 32;
    let h = (b - a) / n0 as f64;
    let mut stack: Vec<(f64, f64, f64, u32)> =
        (0..n0).map(|i| (a + i as f64 * h, a + (i + 1) as f64 * h)).map(|(l, r)| (l, r, gl(l, r), 0)).collect();
    let scale = stack.iter().map(|s| s.2.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
    let mut total = 0.0;
    while let Some((l, r, whole, depth)) = stack.pop() {
        let m = 0.5 * (l + r);
        let (left, right) = (gl(l, m), gl(m, r));
        if (left + right - whole).abs() <= tol * scale * (r - l) / (b - a) || depth > 40 {
            total += left + right;
        } else {
            stack.push((l, m, left, depth + 1));
            stack.push((m, r, right, depth + 1));
        }
    }
    total
}

/// The `J±` integrals by adaptive quadrature in `ρ` after the exact angular
/// integration.
pub fn jpm_integral(r: f64, w: f64) -> Result<JpmValue> {
    if !(w > 0.0) {
        return Err(SpectralError::Precondition(format!("|ω| must be positive, got {w}")));
    }
    let tol = 1e-12;
    let ball = |s: f64| adaptive(&|rho| radial(rho, r, s), 0.0, 1.0, tol);
    // ρ = 1/u on the tail: ρ² dρ → du/u⁴
    let tail = |s: f64| {
        adaptive(
            &|u: f64| if u == 0.0 { 4.0 * PI } else { radial(1.0 / u, r, s) / (u * u) },
            0.0,
            1.0,
            tol,
        )
    };
    let (plus, minus) = (ball(w), ball(-w));
    Ok(JpmValue {
        plus,
        minus,
        full_plus: plus + tail(w),
        full_minus: minus + tail(-w),
        bound: w.powf(-0.5) + r.abs() / w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angular_matches_direct_quadrature() {
        for (rho, r, s) in [(0.3f64, 0.0f64, 1.0f64), (0.5, 2.0, -0.1), (0.01, 5.0, 0.1), (2.0, -3.0, 4.0)] {
            let direct = adaptive(&|mu| 1.0 / (rho.powi(4) + (r * rho * mu + s).powi(2)), -1.0, 1.0, 1e-13);
            let a = angular(rho, r, s);
            assert!((a - direct).abs() < 1e-10 * direct, "{rho} {r} {s}: {a} {direct}");
        }
    }
}
