//! Dirichlet data on the exterior mesh and boundary functionals.
//!
//! A body trace `b` is extended to the far sphere by the far-field template
//! `T b = c·x/|x|³` with `c` chosen so that the total discrete flux through
//! the boundary of the truncated domain vanishes; this keeps every Dirichlet
//! problem solvable for non-solenoidal controls. Fluxes are exact for the
//! piecewise-quadratic traces on the flat faces.

use selfprop_core::{SurfaceSpace, Vec3};

use crate::mesh::Tag;
use crate::space::MixedSpace;

/// Flux weights of the body trace and of the far-field template.
#[derive(Debug, Clone)]
pub struct FarTemplate {
    /// `∮ b·n dγ = Σ_i flux_weights[i]·b_i` over surface-space nodes.
    pub flux_weights: Vec<Vec3>,
    /// Far nodes and the unit template `x/|x|³` at them.
    pub far: Vec<(usize, Vec3)>,
    /// Outward flux of the unit template through the far sphere.
    pub psi: f64,
}

impl FarTemplate {
    pub fn new(space: &MixedSpace, surface: &SurfaceSpace) -> Self {
        let mut flux_weights = vec![Vec3::zeros(); surface.n_nodes()];
        for (f, nodes) in surface.faces.iter().enumerate() {
            // quadratic trace on a flat triangle: only edge midpoints carry
            // weight, each a third of the area
            let w = surface.face_normals[f] * (surface.face_areas[f] / 3.0);
            for &n in &nodes[3..] {
                flux_weights[n] += w;
            }
        }
        let unit = |x: &Vec3| x / x.norm().powi(3);
        let far: Vec<(usize, Vec3)> = space.far_nodes.iter().map(|&n| (n, unit(&space.node_pos[n]))).collect();
        let mut psi = 0.0;
        for f in 0..space.bface_nodes.len() {
            if space.bface_tag[f] != Tag::Far {
                continue;
            }
            let nodes = &space.bface_nodes[f];
            let s: Vec3 = nodes[3..].iter().map(|&n| unit(&space.node_pos[n])).sum();
            psi += space.bface_normal[f].dot(&s) * space.bface_area[f] / 3.0;
        }
        Self { flux_weights, far, psi }
    }

    /// Body flux `∮ b·n dγ` (n into the body).
    pub fn body_flux(&self, trace: &[Vec3]) -> f64 {
        self.flux_weights.iter().zip(trace).map(|(w, b)| w.dot(b)).sum()
    }

    /// Strength `c` of the far template compensating the body flux.
    pub fn coefficient(&self, trace: &[Vec3]) -> f64 {
        -self.body_flux(trace) / self.psi
    }

    /// Writes the body trace and its far template into a full vector.
    pub fn fill(&self, space: &MixedSpace, trace: &[Vec3], x: &mut [f64]) {
        for (i, &n) in space.body_nodes.iter().enumerate() {
            space.set_velocity(x, n, &trace[i]);
        }
        let c = self.coefficient(trace);
        for (n, u) in &self.far {
            space.set_velocity(x, *n, &(c * u));
        }
    }

    /// Full Dirichlet vector of a body trace.
    pub fn data(&self, space: &MixedSpace, trace: &[Vec3]) -> Vec<f64> {
        let mut x = vec![0.0; space.n_dofs()];
        self.fill(space, trace, &mut x);
        x
    }

    /// Pulls a functional on all boundary velocity rows back to the body
    /// trace: `ℓ(b) = r·(T b)` as nodal values on the surface space.
    pub fn pull_back(&self, space: &MixedSpace, r: &[f64]) -> Vec<Vec3> {
        let mut out = space.body_functional(r);
        let far: f64 = self.far.iter().map(|(n, u)| u.dot(&space.velocity(r, *n))).sum();
        let s = -far / self.psi;
        for (o, w) in out.iter_mut().zip(&self.flux_weights) {
            *o += s * w;
        }
        out
    }
}
