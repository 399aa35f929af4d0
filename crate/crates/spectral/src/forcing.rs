use crate::{c, to_c, CVec3, Complex64, Mat3, MozziChaslesFrame, Vec3};
use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

type CMat3 = Matrix3<Complex64>;

/// Building block of `g`, each a Gaussian bump `φ = e^{−|y−c|²/(2s²)}`
/// composed with a vector amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GTerm {
    /// `a φ`
    Gaussian { center: Vec3, width: f64, amp: Vec3 },
    /// `a (d·∇φ)`: zero mean.
    Gradient { center: Vec3, width: f64, amp: Vec3, dir: Vec3 },
    /// `∇φ × a = curl(aφ)`: solenoidal, zero mean.
    Curl { center: Vec3, width: f64, amp: Vec3 },
}

/// `G = A φ`, entering the forcing as `div G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TensorTerm {
    pub center: Vec3,
    pub width: f64,
    pub amp: Mat3,
}

/// Forcing `f = g + div G` with analytically known transforms.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ForcingPair {
    pub g: Vec<GTerm>,
    pub big_g: Vec<TensorTerm>,
}

fn bump(y: &Vec3, center: &Vec3, s: f64) -> f64 {
    (-(y - center).norm_squared() / (2.0 * s * s)).exp()
}

fn bump_grad(y: &Vec3, center: &Vec3, s: f64) -> Vec3 {
    -(y - center) / (s * s) * bump(y, center, s)
}

fn bump_hat(z: &Vec3, center: &Vec3, s: f64) -> Complex64 {
    let mag = (2.0 * PI * s * s).powf(1.5) * (-s * s * z.norm_squared() / 2.0).exp();
    Complex64::from_polar(mag, -z.dot(center))
}

fn cross_c(a: &CVec3, b: &CVec3) -> CVec3 {
    CVec3::new(a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x)
}

impl GTerm {
    fn geometry(&self) -> (Vec3, f64) {
        match *self {
            GTerm::Gaussian { center, width, .. }
            | GTerm::Gradient { center, width, .. }
            | GTerm::Curl { center, width, .. } => (center, width),
        }
    }

    pub fn eval(&self, y: &Vec3) -> Vec3 {
        match *self {
            GTerm::Gaussian { center, width, amp } => amp * bump(y, &center, width),
            GTerm::Gradient { center, width, amp, dir } => amp * dir.dot(&bump_grad(y, &center, width)),
            GTerm::Curl { center, width, amp } => bump_grad(y, &center, width).cross(&amp),
        }
    }

    pub fn hat(&self, z: &Vec3) -> CVec3 {
        let i = Complex64::i();
        match *self {
            GTerm::Gaussian { center, width, amp } => to_c(&amp) * bump_hat(z, &center, width),
            GTerm::Gradient { center, width, amp, dir } => to_c(&amp) * (i * dir.dot(z) * bump_hat(z, &center, width)),
            GTerm::Curl { center, width, amp } => {
                cross_c(&(to_c(z) * (i * bump_hat(z, &center, width))), &to_c(&amp))
            }
        }
    }

    fn transformed(&self, m: &Mat3, shift: &Vec3) -> Self {
        let mc = |c: &Vec3| m * (c - shift);
        match *self {
            GTerm::Gaussian { center, width, amp } => GTerm::Gaussian { center: mc(&center), width, amp: m * amp },
            GTerm::Gradient { center, width, amp, dir } => {
                GTerm::Gradient { center: mc(&center), width, amp: m * amp, dir: m * dir }
            }
            GTerm::Curl { center, width, amp } => GTerm::Curl { center: mc(&center), width, amp: m * amp },
        }
    }
}

impl TensorTerm {
    pub fn eval(&self, y: &Vec3) -> Mat3 {
        self.amp * bump(y, &self.center, self.width)
    }

    pub fn hat(&self, z: &Vec3) -> CMat3 {
        self.amp.map(c) * bump_hat(z, &self.center, self.width)
    }

    /// `div G = A ∇φ`.
    pub fn div(&self, y: &Vec3) -> Vec3 {
        self.amp * bump_grad(y, &self.center, self.width)
    }
}

impl ForcingPair {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_g(g: Vec<GTerm>) -> Self {
        Self { g, big_g: Vec::new() }
    }

    pub fn from_big_g(big_g: Vec<TensorTerm>) -> Self {
        Self { g: Vec::new(), big_g }
    }

    pub fn is_zero(&self) -> bool {
        self.g.is_empty() && self.big_g.is_empty()
    }

    pub fn g_at(&self, y: &Vec3) -> Vec3 {
        self.g.iter().map(|t| t.eval(y)).sum()
    }

    pub fn big_g_at(&self, y: &Vec3) -> Mat3 {
        self.big_g.iter().map(|t| t.eval(y)).sum()
    }

    /// `f = g + div G`.
    pub fn f_at(&self, y: &Vec3) -> Vec3 {
        self.g_at(y) + self.big_g.iter().map(|t| t.div(y)).sum::<Vec3>()
    }

    pub fn g_hat(&self, z: &Vec3) -> CVec3 {
        self.g.iter().map(|t| t.hat(z)).sum()
    }

    pub fn big_g_hat(&self, z: &Vec3) -> CMat3 {
        self.big_g.iter().map(|t| t.hat(z)).sum()
    }

    /// `iĜζ`, the transform of `div G`.
    pub fn div_g_hat(&self, z: &Vec3) -> CVec3 {
        self.big_g_hat(z) * to_c(z) * Complex64::i()
    }

    pub fn f_hat(&self, z: &Vec3) -> CVec3 {
        self.g_hat(z) + self.div_g_hat(z)
    }

    /// `∫ g`.
    pub fn integral_g(&self) -> Vec3 {
        self.g_hat(&Vec3::zeros()).map(|z| z.re)
    }

    /// Radius outside which the forcing is below `e^{−24}` of its peak.
    pub fn radius(&self) -> f64 {
        let gs = self.g.iter().map(|t| t.geometry());
        let ts = self.big_g.iter().map(|t| (t.center, t.width));
        gs.chain(ts).map(|(c, s)| c.norm() + 7.0 * s).fold(0.0, f64::max)
    }

    /// Largest bump centre distance; along a rotation orbit `|η|` is fixed, so
    /// this bounds the angular phase rate of `f̂` as `|η_⊥|·radius`.
    pub fn phase_radius(&self) -> f64 {
        let gs = self.g.iter().map(|t| t.geometry().0);
        let ts = self.big_g.iter().map(|t| t.center);
        gs.chain(ts).map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Frequency scale beyond which the transform is below double precision.
    pub fn bandwidth(&self) -> f64 {
        let gs = self.g.iter().map(|t| t.geometry().1);
        let ts = self.big_g.iter().map(|t| t.width);
        gs.chain(ts).map(|s| 9.0 / s).fold(0.0, f64::max)
    }

    /// The forcing seen in the frame `y = M(x − shift)`: `f_y(y) = M f(x)`.
    pub fn in_frame(&self, frame: &MozziChaslesFrame) -> Self {
        let (m, sh) = (frame.m, frame.shift);
        Self {
            g: self.g.iter().map(|t| t.transformed(&m, &sh)).collect(),
            big_g: self
                .big_g
                .iter()
                .map(|t| TensorTerm { center: m * (t.center - sh), width: t.width, amp: m * t.amp * m.transpose() })
                .collect(),
        }
    }

    /// Reproducible pseudo-random forcing with `n` terms of each requested
    /// kind, centres within `spread` of the origin.
    pub fn random(seed: u64, n: usize, spread: f64, kinds: &[&str]) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = |rng: &mut ChaCha8Rng, a: f64| Vec3::new(rng.random_range(-a..a), rng.random_range(-a..a), rng.random_range(-a..a));
        let mut out = Self::zero();
        for _ in 0..n {
            for kind in kinds {
                let center = v(&mut rng, spread);
                let width = rng.random_range(0.5..0.9);
                let amp = v(&mut rng, 1.0);
                match *kind {
                    "gaussian" => out.g.push(GTerm::Gaussian { center, width, amp }),
                    "gradient" => {
                        let dir = v(&mut rng, 1.0);
                        out.g.push(GTerm::Gradient { center, width, amp, dir })
                    }
                    "curl" => out.g.push(GTerm::Curl { center, width, amp }),
                    "tensor" => {
                        let amp = Mat3::from_fn(|_, _| rng.random_range(-1.0..1.0));
                        out.big_g.push(TensorTerm { center, width, amp })
                    }
                    other => panic!("unknown forcing kind {other}"),
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SpectralGrid;

    #[test]
    fn transforms_match_fft() {
        let f = ForcingPair::random(3, 1, 1.0, &["gaussian", "gradient", "curl", "tensor"]);
        let grid = SpectralGrid::new(6.0, 64).unwrap();
        let phys: Vec<CVec3> = (0..grid.len()).map(|i| to_c(&f.f_at(&grid.point(i)))).collect();
        let hat = grid.to_fourier(&phys);
        let mut err: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for (i, h) in hat.iter().enumerate().step_by(97) {
            err = err.max((h - f.f_hat(&grid.zeta(i))).norm());
            scale = scale.max(h.norm());
        }
        assert!(err < 1e-8 * scale, "{err} {scale}");
    }

    #[test]
    fn frame_transform_is_pointwise() {
        let f = ForcingPair::random(4, 1, 1.0, &["gaussian", "gradient", "curl", "tensor"]);
        let motion = selfprop_core::RigidMotion::new(Vec3::new(0.3, -0.5, 0.2), Vec3::new(0.2, 0.9, -0.4));
        let frame = crate::mozzi_chasles(&motion).unwrap();
        let fy = f.in_frame(&frame);
        let x = Vec3::new(0.4, 0.1, -0.3);
        let y = frame.to_frame(&x);
        assert!((fy.f_at(&y) - frame.m * f.f_at(&x)).norm() < 1e-13);
        assert!((fy.big_g_at(&y) - frame.m * f.big_g_at(&x) * frame.m.transpose()).norm() < 1e-13);
    }
}
