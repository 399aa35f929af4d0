use crate::{CVec3, Complex64, Result, SpectralError, Vec3};
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Periodic box `[−L, L)³` with `N` points per axis and its wavenumber lattice
/// `ζ = (π/L)k`, `k ∈ {−N/2, …, N/2−1}³`.
///
/// Lattice values approximate the continuous transform, so the physical
/// samples are `v(y_j) ≈ (2L)^{−3} Σ_k v̂(ζ_k) e^{iζ_k·y_j}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralGrid {
    pub l: f64,
    pub n: usize,
}

impl SpectralGrid {
    pub fn new(l: f64, n: usize) -> Result<Self> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(SpectralError::Precondition(format!("box half-length must be positive, got {l}")));
        }
        if n < 2 || n % 2 != 0 {
            return Err(SpectralError::Precondition(format!("N must be even and ≥ 2, got {n}")));
        }
        Ok(Self { l, n })
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.l / self.n as f64
    }

    /// Lattice spacing `π/L` of the wavenumbers.
    pub fn dzeta(&self) -> f64 {
        PI / self.l
    }

    /// Signed integer wavenumber of FFT index `i`.
    pub fn signed(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    pub fn split(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.n;
        (idx / (n * n), (idx / n) % n, idx % n)
    }

    /// Wavenumber of flat index `idx` (FFT ordering).
    pub fn zeta(&self, idx: usize) -> Vec3 {
        let (i, j, k) = self.split(idx);
        Vec3::new(self.signed(i) as f64, self.signed(j) as f64, self.signed(k) as f64) * self.dzeta()
    }

    /// Whether the mode carries a Nyquist index in some direction; such modes
    /// have no Hermitian partner and are zeroed.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let (i, j, k) = self.split(idx);
        let h = self.n / 2;
        i == h || j == h || k == h
    }

    /// Physical point of flat index `idx`.
    pub fn point(&self, idx: usize) -> Vec3 {
        let (i, j, k) = self.split(idx);
        let dx = self.dx();
        Vec3::new(-self.l + i as f64 * dx, -self.l + j as f64 * dx, -self.l + k as f64 * dx)
    }

    /// Lattice values of a continuous transform → physical samples.
    pub fn to_physical(&self, hat: &[CVec3]) -> Vec<CVec3> {
        let mut comps = self.unzip(hat, |idx, z| z * self.phase(idx, 1.0));
        for c in comps.iter_mut() {
            fft3(c, self.n, true);
        }
        let s = 1.0 / (2.0 * self.l).powi(3);
        self.zip(&comps, s)
    }

    /// Physical samples → lattice approximation of the continuous transform.
    pub fn to_fourier(&self, phys: &[CVec3]) -> Vec<CVec3> {
        let mut comps = self.unzip(phys, |_, z| z);
        for c in comps.iter_mut() {
            fft3(c, self.n, false);
        }
        let dv = self.dx().powi(3);
        let out = self.zip(&comps, dv);
        out.into_iter().enumerate().map(|(idx, v)| v * self.phase(idx, -1.0)).collect()
    }

    /// `e^{∓iζ·L(1,1,1)}` shift between the box origin and its corner.
    fn phase(&self, idx: usize, sign: f64) -> Complex64 {
        let z = self.zeta(idx);
        Complex64::from_polar(1.0, -sign * self.l * (z.x + z.y + z.z))
    }

    fn unzip(&self, v: &[CVec3], f: impl Fn(usize, Complex64) -> Complex64) -> [Vec<Complex64>; 3] {
        assert_eq!(v.len(), self.len());
        std::array::from_fn(|c| v.iter().enumerate().map(|(i, x)| f(i, x[c])).collect())
    }

    fn zip(&self, comps: &[Vec<Complex64>; 3], s: f64) -> Vec<CVec3> {
        (0..self.len()).map(|i| CVec3::new(comps[0][i], comps[1][i], comps[2][i]) * Complex64::new(s, 0.0)).collect()
    }

    /// `∫|v|²` from physical samples.
    pub fn l2_sq_physical(&self, phys: &[CVec3]) -> f64 {
        phys.iter().map(|v| v.norm_squared()).sum::<f64>() * self.dx().powi(3)
    }

    /// `(2π)^{−3} ∫|v̂|²` from lattice values (Plancherel).
    pub fn l2_sq_fourier(&self, hat: &[CVec3]) -> f64 {
        hat.iter().map(|v| v.norm_squared()).sum::<f64>() / (2.0 * self.l).powi(3)
    }
}

/// Unnormalized 3-D FFT in place (`inverse` uses `e^{+i…}`).
pub fn fft3(data: &mut [Complex64], n: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    // last axis: contiguous rows
    fft.process(data);
    let mut line = vec![Complex64::default(); n];
    let starts_j = (0..n * n).map(|b| (b / n) * n * n + b % n);
    let starts_i = 0..n * n;
    for (stride, start) in starts_j.map(|s| (n, s)).chain(starts_i.map(|s| (n * n, s))) {
        for (m, l) in line.iter_mut().enumerate() {
            *l = data[start + m * stride];
        }
        fft.process(&mut line);
        for (m, l) in line.iter().enumerate() {
            data[start + m * stride] = *l;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invariants() {
        assert!(SpectralGrid::new(1.0, 7).is_err());
        assert!(SpectralGrid::new(0.0, 8).is_err());
        let g = SpectralGrid::new(2.0, 8).unwrap();
        let zeros = (0..g.len()).filter(|&i| g.zeta(i) == Vec3::zeros()).count();
        assert_eq!(zeros, 1);
    }

    #[test]
    fn fft_roundtrip_and_gaussian() {
        let g = SpectralGrid::new(8.0, 40).unwrap();
        let phys: Vec<CVec3> = (0..g.len())
            .map(|i| {
                let y = g.point(i);
                let e = (-(y - Vec3::new(0.3, -0.2, 0.1)).norm_squared() / 2.0).exp();
                CVec3::new(Complex64::new(e, 0.0), Complex64::new(0.0, 2.0 * e), Complex64::new(-e, e))
            })
            .collect();
        let hat = g.to_fourier(&phys);
        // continuous transform of e^{-|y-c|²/2} is (2π)^{3/2} e^{-|ζ|²/2} e^{-iζ·c}
        for idx in [1usize, 37, 500, 1000] {
            let z = g.zeta(idx);
            let exact = (2.0 * PI).powf(1.5) * (-z.norm_squared() / 2.0).exp()
                * Complex64::from_polar(1.0, -z.dot(&Vec3::new(0.3, -0.2, 0.1)));
            assert!((hat[idx][0] - exact).norm() < 1e-9, "{idx}");
        }
        let back = g.to_physical(&hat);
        let err = phys.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
        let p = g.l2_sq_physical(&phys);
        assert!((p - g.l2_sq_fourier(&hat)).abs() < 1e-12 * p);
    }
}
