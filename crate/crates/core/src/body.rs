//! Rigid body description: surface, volume integrals and the patch weight χ.

use std::collections::HashSet;

use crate::{CoreError, Mat3, Result, Surface, Vec3};

/// Volume integrals of a closed surface's interior (density 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyIntegrals {
    /// `m = ∫_S dx`.
    pub mass: f64,
    /// `I = ∫_S (|x|² 𝕀 − x⊗x) dx`.
    pub inertia: Mat3,
    /// `∫_S x dx / m`.
    pub centroid: Vec3,
}

/// Mass, inertia and centroid of the region enclosed by `surface`.
///
/// The interior is split into the tetrahedra spanned by the origin and each
/// face (signed volumes), and the moments are integrated exactly — the
/// integrands are at most quadratic.
pub fn body_integrals(surface: &Surface) -> Result<BodyIntegrals> {
    surface.check_closed()?;
    let mut m = 0.0;
    let mut first = Vec3::zeros();
    let mut second = Mat3::zeros();
    for t in &surface.triangles {
        let [a, b, c] = surface.corners(t);
        let vol = a.dot(&b.cross(&c)) / 6.0;
        let s = a + b + c;
        m += vol;
        first += vol * s / 4.0;
        // ∫_T x xᵀ = |T|/20 (Σ_v v vᵀ + s sᵀ) for a tet with one vertex at 0.
        second += vol / 20.0 * (a * a.transpose() + b * b.transpose() + c * c.transpose() + s * s.transpose());
    }
    if m <= 0.0 {
        return Err(CoreError::Geometry(format!("non-positive enclosed volume {m:.3e}")));
    }
    let inertia = Mat3::identity() * second.trace() - second;
    Ok(BodyIntegrals { mass: m, inertia, centroid: first / m })
}

/// Body geometry: closed surface with its patch Γ, volume integrals and the
/// patch weight χ (piecewise linear over the surface, one value per vertex).
#[derive(Debug, Clone)]
pub struct BodyGeometry {
    pub surface: Surface,
    pub mass: f64,
    pub inertia: Mat3,
    pub centroid: Vec3,
    /// χ at the surface vertices; zero outside Γ and on its rim.
    pub chi: Vec<f64>,
}

impl BodyGeometry {
    /// Builds the body and enforces its invariants: closed surface, centroid
    /// at the origin within `centroid_tol(h)`, symmetric positive definite
    /// inertia.
    pub fn new(surface: Surface) -> Result<Self> {
        let bi = body_integrals(&surface)?;
        let h = surface.max_edge();
        let tol = centroid_tol(h);
        let off = bi.centroid.norm();
        if off > tol {
            return Err(CoreError::Centroid { centroid: bi.centroid.into(), offset: off, tol });
        }
        let sym = (bi.inertia - bi.inertia.transpose()).norm();
        let eig = nalgebra::SymmetricEigen::new(bi.inertia);
        if sym > 1e-12 * bi.inertia.norm() || eig.eigenvalues.min() <= 0.0 {
            return Err(CoreError::Geometry("inertia tensor is not symmetric positive definite".into()));
        }
        let chi = raised_cosine_chi(&surface);
        Ok(Self { surface, mass: bi.mass, inertia: bi.inertia, centroid: bi.centroid, chi })
    }

    /// Scales χ (used for linearity audits).
    pub fn with_chi_scaled(mut self, s: f64) -> Self {
        self.chi.iter_mut().for_each(|c| *c *= s);
        self
    }

    /// Replaces χ by arbitrary per-vertex values (clamped to be ≥ 0 and zero
    /// outside Γ).
    pub fn with_chi(mut self, chi: Vec<f64>) -> Result<Self> {
        if chi.len() != self.surface.vertices.len() {
            return Err(CoreError::Geometry("χ needs one value per vertex".into()));
        }
        let inside = patch_interior_vertices(&self.surface);
        self.chi = chi.iter().enumerate().map(|(i, &c)| if inside.contains(&i) { c.max(0.0) } else { 0.0 }).collect();
        Ok(self)
    }

    pub fn has_patch(&self) -> bool {
        self.surface.gamma.iter().any(|&g| g)
    }

    /// `χ` is not identically zero.
    pub fn chi_is_nontrivial(&self) -> bool {
        self.chi.iter().any(|&c| c > 0.0)
    }

    pub fn circumradius(&self) -> f64 {
        self.surface.circumradius()
    }
}

/// Centroid tolerance, scaled with the square of the mesh size.
pub fn centroid_tol(h: f64) -> f64 {
    1e-2 * h * h
}

/// Vertices all of whose incident faces lie in Γ.
fn patch_interior_vertices(s: &Surface) -> HashSet<usize> {
    let mut touched_out = vec![false; s.vertices.len()];
    let mut touched_in = vec![false; s.vertices.len()];
    for (t, &g) in s.triangles.iter().zip(&s.gamma) {
        for &v in t {
            if g {
                touched_in[v] = true;
            } else {
                touched_out[v] = true;
            }
        }
    }
    (0..s.vertices.len()).filter(|&v| touched_in[v] && !touched_out[v]).collect()
}

/// Raised-cosine bump over Γ: `χ = ½(1 − cos(π d/d_max))` with `d` the
/// distance to the rim of Γ (vertices shared with non-Γ faces), so χ = 0 on
/// the rim and outside Γ and reaches 1 at the patch centre. If Γ is the whole
/// surface, χ ≡ 1.
fn raised_cosine_chi(s: &Surface) -> Vec<f64> {
    let nv = s.vertices.len();
    let inside = patch_interior_vertices(s);
    if inside.is_empty() {
        return vec![0.0; nv];
    }
    let rim: Vec<usize> = {
        let mut in_patch = vec![false; nv];
        for (t, &g) in s.triangles.iter().zip(&s.gamma) {
            if g {
                t.iter().for_each(|&v| in_patch[v] = true);
            }
        }
        (0..nv).filter(|v| in_patch[*v] && !inside.contains(v)).collect()
    };
    if rim.is_empty() {
        return vec![1.0; nv];
    }
    let mut d = vec![0.0; nv];
    for &v in &inside {
        d[v] = rim.iter().map(|&r| (s.vertices[v] - s.vertices[r]).norm()).fold(f64::INFINITY, f64::min);
    }
    let dmax = d.iter().copied().fold(0.0, f64::max);
    d.iter()
        .map(|&di| if dmax > 0.0 { 0.5 * (1.0 - (std::f64::consts::PI * di / dmax).cos()) } else { 0.0 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_vanishes_outside_patch_and_peaks_at_one() {
        let s = Surface::icosphere(2, 1.0).with_gamma(|c| c.x > 0.4);
        let b = BodyGeometry::new(s).unwrap();
        let max = b.chi.iter().copied().fold(0.0, f64::max);
        assert!((max - 1.0).abs() < 1e-12);
        for (t, &g) in b.surface.triangles.iter().zip(&b.surface.gamma) {
            if !g {
                assert!(t.iter().all(|&v| b.chi[v] == 0.0));
            }
        }
        assert!(b.chi.iter().all(|&c| c >= 0.0));
    }

    #[test]
    fn empty_patch_gives_zero_chi() {
        let b = BodyGeometry::new(Surface::icosphere(1, 1.0)).unwrap();
        assert!(!b.chi_is_nontrivial());
    }
}
