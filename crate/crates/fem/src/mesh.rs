//! Tetrahedral meshes of the truncated exterior domain.
//!
//! The exterior mesh is a radial extrusion of the (star-shaped) body surface
//! out to the sphere of radius `R∞`: every surface vertex spawns a column of
//! points with geometrically graded radii, and every surface triangle spawns
//! a column of prisms, each split into three tetrahedra by the global vertex
//! order so that neighbouring prisms stay conforming.

use std::collections::HashMap;

use selfprop_core::{BodyGeometry, Vec3};

use crate::{FemError, Result};

/// Boundary part a face belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    Body,
    Far,
}

/// Boundary face: vertex indices, tag and the tetrahedron owning it.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFace {
    pub nodes: [usize; 3],
    pub tag: Tag,
    pub tet: usize,
}

/// Conforming tetrahedral mesh with tagged boundary faces.
#[derive(Debug, Clone, PartialEq)]
pub struct TetMesh {
    pub points: Vec<Vec3>,
    pub tets: Vec<[usize; 4]>,
    pub faces: Vec<BoundaryFace>,
}

/// Minimum admissible dihedral angle, in degrees.
pub const MIN_DIHEDRAL_DEG: f64 = 5.0;

impl TetMesh {
    /// Builds the mesh, orients every tetrahedron positively and extracts the
    /// boundary faces; `tag` classifies each boundary face.
    pub fn new(points: Vec<Vec3>, mut tets: Vec<[usize; 4]>, tag: impl Fn(&[usize; 3]) -> Tag) -> Result<Self> {
        let mut bad = Vec::new();
        for (i, t) in tets.iter_mut().enumerate() {
            let v = signed_volume(&points, t);
            if v < 0.0 {
                t.swap(2, 3);
            } else if v == 0.0 {
                bad.push(i);
            }
        }
        if !bad.is_empty() {
            return Err(FemError::Geometry { msg: "degenerate tetrahedra".into(), cells: bad });
        }
        let mut seen: HashMap<[usize; 3], (usize, usize)> = HashMap::with_capacity(tets.len() * 2);
        for (i, t) in tets.iter().enumerate() {
            for k in 0..4 {
                let mut f = [t[(k + 1) % 4], t[(k + 2) % 4], t[(k + 3) % 4]];
                f.sort_unstable();
                seen.entry(f).and_modify(|e| e.1 += 1).or_insert((i, 1));
            }
        }
        let mut faces: Vec<BoundaryFace> = seen
            .into_iter()
            .filter(|(_, (_, c))| *c == 1)
            .map(|(f, (tet, _))| BoundaryFace { nodes: f, tag: tag(&f), tet })
            .collect();
        if let Some((f, _)) = seen_overfull(&tets) {
            return Err(FemError::Geometry { msg: format!("non-manifold face {f:?}"), cells: Vec::new() });
        }
        faces.sort_by(|a, b| a.nodes.cmp(&b.nodes));
        Ok(Self { points, tets, faces })
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn n_tets(&self) -> usize {
        self.tets.len()
    }

    pub fn corners(&self, t: usize) -> [Vec3; 4] {
        let c = &self.tets[t];
        [self.points[c[0]], self.points[c[1]], self.points[c[2]], self.points[c[3]]]
    }

    pub fn volume(&self) -> f64 {
        self.tets.iter().map(|t| signed_volume(&self.points, t)).sum()
    }

    /// Unit normal of a boundary face pointing out of the meshed domain, and
    /// the face area.
    pub fn face_normal_area(&self, f: usize) -> (Vec3, f64) {
        let face = &self.faces[f];
        let [a, b, c] = face.nodes.map(|i| self.points[i]);
        let cr = (b - a).cross(&(c - a));
        let opp = self.tets[face.tet].iter().find(|v| !face.nodes.contains(v)).copied().unwrap();
        let s = if cr.dot(&(self.points[opp] - a)) > 0.0 { -1.0 } else { 1.0 };
        let n2 = cr.norm();
        (s * cr / n2, 0.5 * n2)
    }

    /// Smallest dihedral angle (degrees) of each tetrahedron.
    pub fn min_dihedral(&self) -> Vec<f64> {
        (0..self.n_tets()).map(|t| min_dihedral_deg(&self.corners(t))).collect()
    }

    /// Cells whose minimum dihedral angle is below the threshold.
    pub fn slivers(&self, threshold_deg: f64) -> Vec<usize> {
        self.min_dihedral().iter().enumerate().filter(|(_, &a)| a < threshold_deg).map(|(i, _)| i).collect()
    }

    /// Uniform Kuhn subdivision of the box `[0,1]³` into `6n³` tetrahedra;
    /// every boundary face is tagged `Far`.
    pub fn unit_cube(n: usize) -> Result<Self> {
        let m = n + 1;
        let id = |i: usize, j: usize, k: usize| i + m * (j + m * k);
        let mut points = Vec::with_capacity(m * m * m);
        for k in 0..m {
            for j in 0..m {
                for i in 0..m {
                    points.push(Vec3::new(i as f64, j as f64, k as f64) / n as f64);
                }
            }
        }
        const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut tets = Vec::with_capacity(6 * n * n * n);
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    for p in PERMS {
                        let mut c = [i, j, k];
                        let mut t = [id(c[0], c[1], c[2]), 0, 0, 0];
                        for (s, &ax) in p.iter().enumerate() {
                            c[ax] += 1;
                            t[s + 1] = id(c[0], c[1], c[2]);
                        }
                        tets.push(t);
                    }
                }
            }
        }
        Self::new(points, tets, |_| Tag::Far)
    }
}

fn seen_overfull(tets: &[[usize; 4]]) -> Option<([usize; 3], usize)> {
    let mut count: HashMap<[usize; 3], usize> = HashMap::with_capacity(tets.len() * 2);
    for t in tets {
        for k in 0..4 {
            let mut f = [t[(k + 1) % 4], t[(k + 2) % 4], t[(k + 3) % 4]];
            f.sort_unstable();
            *count.entry(f).or_insert(0) += 1;
        }
    }
    count.into_iter().find(|(_, c)| *c > 2)
}

pub fn signed_volume(points: &[Vec3], t: &[usize; 4]) -> f64 {
    let [a, b, c, d] = t.map(|i| points[i]);
    (b - a).cross(&(c - a)).dot(&(d - a)) / 6.0
}

/// Smallest interior dihedral angle of a tetrahedron, in degrees.
pub fn min_dihedral_deg(p: &[Vec3; 4]) -> f64 {
    // outward face normals; face k is opposite vertex k
    let normals: Vec<Vec3> = (0..4)
        .map(|k| {
            let [a, b, c] = [p[(k + 1) % 4], p[(k + 2) % 4], p[(k + 3) % 4]];
            let n = (b - a).cross(&(c - a));
            if n.dot(&(p[k] - a)) > 0.0 { -n } else { n }.normalize()
        })
        .collect();
    let mut best = f64::INFINITY;
    for i in 0..4 {
        for j in i + 1..4 {
            let cosang = (-normals[i].dot(&normals[j])).clamp(-1.0, 1.0);
            best = best.min(cosang.acos().to_degrees());
        }
    }
    best
}

/// Mesh of the truncated exterior domain `B_{R∞} ∖ body`.
#[derive(Debug, Clone)]
pub struct ExteriorMesh {
    pub mesh: TetMesh,
    /// Body actually meshed (the input surface, refined to the mesh size).
    pub body: BodyGeometry,
    pub r_far: f64,
    pub h: f64,
    pub layers: usize,
    /// `faces[body_faces[f]]` is the mesh face of surface triangle `f`.
    pub body_faces: Vec<usize>,
}

impl ExteriorMesh {
    pub fn n_body_vertices(&self) -> usize {
        self.body.surface.vertices.len()
    }
}

/// Builds the exterior mesh around `body` out to radius `r_far` with target
/// size `h`. The surface is refined by midpoint subdivision until its longest
/// edge is at most `1.5 h`.
pub fn build_mesh(body: &BodyGeometry, r_far: f64, h: f64) -> Result<ExteriorMesh> {
    if !(r_far > 0.0 && h > 0.0) || !r_far.is_finite() || !h.is_finite() {
        return Err(FemError::geometry(format!("R∞ = {r_far} and h = {h} must be positive")));
    }
    let rc = body.circumradius();
    if r_far <= 2.0 * rc {
        return Err(FemError::geometry(format!("R∞ = {r_far} must exceed twice the body circumradius {rc:.4}")));
    }
    let mut body = body.clone();
    while body.surface.max_edge() > 1.5 * h {
        let chi_scale = body.chi.iter().cloned().fold(0.0, f64::max);
        let refined = body.surface.subdivided(None);
        body = BodyGeometry::new(refined)?;
        if chi_scale > 0.0 {
            let m = body.chi.iter().cloned().fold(0.0, f64::max);
            if m > 0.0 {
                body = body.with_chi_scaled(chi_scale / m);
            }
        }
    }
    let s = &body.surface;
    if !s.is_star_shaped() {
        return Err(FemError::geometry("body is not star-shaped with respect to the origin"));
    }
    let nv = s.vertices.len();
    let rho: Vec<f64> = s.vertices.iter().map(|v| v.norm()).collect();
    let rho_min = rho.iter().cloned().fold(f64::INFINITY, f64::min);
    let rho_mean = rho.iter().sum::<f64>() / nv as f64;
    let growth = 1.0 + s.max_edge() / rho_mean;
    let layers = (((r_far / rho_min).ln() / growth.ln()).ceil() as usize).max(2);

    let mut points = Vec::with_capacity(nv * (layers + 1));
    for k in 0..=layers {
        let t = k as f64 / layers as f64;
        for (v, &r) in s.vertices.iter().zip(&rho) {
            let rk = r.powf(1.0 - t) * r_far.powf(t);
            points.push(v * (rk / r));
        }
    }
    let mut tets = Vec::with_capacity(3 * layers * s.triangles.len());
    for k in 0..layers {
        let (lo, hi) = (k * nv, (k + 1) * nv);
        for tri in &s.triangles {
            let mut t = *tri;
            t.sort_unstable();
            let [a, b, c] = t;
            tets.push([lo + a, lo + b, lo + c, hi + c]);
            tets.push([lo + a, lo + b, hi + b, hi + c]);
            tets.push([lo + a, hi + a, hi + b, hi + c]);
        }
    }
    let far0 = layers * nv;
    let mesh = TetMesh::new(points, tets, |f| if f.iter().all(|&i| i < nv) { Tag::Body } else { Tag::Far })?;
    if let Some(bad) = mesh.faces.iter().position(|f| f.tag == Tag::Far && !f.nodes.iter().all(|&i| i >= far0)) {
        return Err(FemError::geometry(format!("boundary face {bad} is neither on the body nor on the far sphere")));
    }
    let lookup: HashMap<[usize; 3], usize> = mesh.faces.iter().enumerate().map(|(i, f)| (f.nodes, i)).collect();
    let mut body_faces = Vec::with_capacity(s.triangles.len());
    for tri in &s.triangles {
        let mut key = *tri;
        key.sort_unstable();
        match lookup.get(&key) {
            Some(&i) => body_faces.push(i),
            None => return Err(FemError::geometry(format!("surface triangle {tri:?} is not a mesh face"))),
        }
    }
    let n_body = mesh.faces.iter().filter(|f| f.tag == Tag::Body).count();
    if n_body != s.triangles.len() {
        return Err(FemError::geometry("body faces do not match the surface triangulation"));
    }
    let slivers = mesh.slivers(MIN_DIHEDRAL_DEG);
    if !slivers.is_empty() {
        return Err(FemError::Geometry {
            msg: format!("{} cells below the {MIN_DIHEDRAL_DEG}° dihedral threshold", slivers.len()),
            cells: slivers.into_iter().take(32).collect(),
        });
    }
    Ok(ExteriorMesh { mesh, body, r_far, h, layers, body_faces })
}
