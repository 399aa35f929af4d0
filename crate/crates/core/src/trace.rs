//! Piecewise-quadratic boundary space on the body surface.
//!
//! Nodes are the surface vertices followed by the edge midpoints. Traces are
//! stored as nodal vectors and interpolated quadratically on each flat face.
//! Normal components are taken nodewise against area-averaged nodal normals
//! and then interpolated, so a nodally tangential field has an identically
//! vanishing normal component in every boundary integral.

use std::collections::HashMap;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use crate::quadrature::triangle_deg7;
use crate::sparse::{cg, Csr};
use crate::{BodyGeometry, CoreError, Result, Vec3, TRACE_TOL};

/// Admissibility class of a boundary trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceKind {
    /// Zero normal component at every node.
    Tangential,
    /// Zero at every node touching a face outside Γ.
    Localized,
    /// No constraint.
    General,
}

impl TraceKind {
    pub fn name(&self) -> &'static str {
        match self {
            TraceKind::Tangential => "tangential",
            TraceKind::Localized => "localized",
            TraceKind::General => "general",
        }
    }
}

impl std::str::FromStr for TraceKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "tangential" => Ok(TraceKind::Tangential),
            "localized" => Ok(TraceKind::Localized),
            "general" => Ok(TraceKind::General),
            _ => Err(format!("unknown trace kind '{s}' (expected tangential or localized)")),
        }
    }
}

/// Vector field sampled at the boundary nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceField {
    pub values: Vec<Vec3>,
    pub kind: TraceKind,
}

impl TraceField {
    pub fn zeros(n: usize, kind: TraceKind) -> Self {
        Self { values: vec![Vec3::zeros(); n], kind }
    }

    pub fn new(values: Vec<Vec3>, kind: TraceKind) -> Self {
        Self { values, kind }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { values: self.values.iter().map(|v| v * s).collect(), kind: self.kind }
    }

    /// `self + a·other`, keeping `self`'s kind.
    pub fn axpy(&self, a: f64, other: &TraceField) -> Self {
        Self {
            values: self.values.iter().zip(&other.values).map(|(x, y)| x + a * y).collect(),
            kind: self.kind,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Flattened `[x0, y0, z0, x1, ...]`.
    pub fn flat(&self) -> Vec<f64> {
        self.values.iter().flat_map(|v| [v.x, v.y, v.z]).collect()
    }

    pub fn from_flat(x: &[f64], kind: TraceKind) -> Self {
        Self { values: x.chunks(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect(), kind }
    }

    /// Verifies the kind invariant on `space`.
    pub fn check(&self, space: &SurfaceSpace) -> Result<()> {
        if self.values.len() != space.n_nodes() {
            return Err(CoreError::Geometry(format!(
                "trace has {} values, space has {} nodes",
                self.values.len(),
                space.n_nodes()
            )));
        }
        let scale = self.max_abs().max(1.0);
        match self.kind {
            TraceKind::Tangential => {
                let worst = space.max_normal_component(&self.values);
                if worst > TRACE_TOL * scale {
                    return Err(CoreError::Geometry(format!("tangential trace has normal component {worst:.3e}")));
                }
            }
            TraceKind::Localized => {
                for (i, v) in self.values.iter().enumerate() {
                    if !space.patch_free[i] && *v != Vec3::zeros() {
                        return Err(CoreError::Geometry(format!("localized trace is nonzero at node {i} outside Γ")));
                    }
                }
            }
            TraceKind::General => {}
        }
        Ok(())
    }
}

/// Quadratic basis functions on a triangle at barycentric `l`, ordered
/// (v0, v1, v2, e01, e12, e20).
#[inline]
pub fn p2_tri(l: &[f64; 3]) -> [f64; 6] {
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[0] * l[1],
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
    ]
}

/// A boundary quadrature point.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryQp {
    pub face: usize,
    pub x: Vec3,
    /// Quadrature weight including the face area.
    pub w: f64,
    pub phi: [f64; 6],
}

/// Quadratic boundary space on the body surface.
#[derive(Debug)]
pub struct SurfaceSpace {
    pub n_vertices: usize,
    pub edges: Vec<(usize, usize)>,
    pub edge_index: HashMap<(usize, usize), usize>,
    /// Node positions (vertices, then edge midpoints).
    pub nodes: Vec<Vec3>,
    /// Six node indices per face.
    pub faces: Vec<[usize; 6]>,
    /// Fluid-domain normal of each face (pointing into the body).
    pub face_normals: Vec<Vec3>,
    pub face_areas: Vec<f64>,
    pub face_gamma: Vec<bool>,
    /// Area-averaged nodal normals (into the body).
    pub node_normals: Vec<Vec3>,
    /// Orthonormal tangent pair per node.
    pub tangents: Vec<[Vec3; 2]>,
    /// Nodes all of whose faces belong to Γ.
    pub patch_free: Vec<bool>,
    /// χ at the nodes (exact quadratic representation of the linear χ).
    pub chi: Vec<f64>,
    pub mass: Csr,
    pub stiffness: Csr,
    qps: Vec<BoundaryQp>,
    surrogate: OnceLock<SurrogateNorm>,
}

impl SurfaceSpace {
    pub fn new(body: &BodyGeometry) -> Self {
        let s = &body.surface;
        let nv = s.vertices.len();
        let edges = s.edges();
        let edge_index: HashMap<(usize, usize), usize> = edges.iter().enumerate().map(|(i, &e)| (e, nv + i)).collect();
        let mut nodes = s.vertices.clone();
        nodes.extend(edges.iter().map(|&(a, b)| 0.5 * (s.vertices[a] + s.vertices[b])));
        let nn = nodes.len();
        let eid = |a: usize, b: usize| edge_index[&(a.min(b), a.max(b))];
        let faces: Vec<[usize; 6]> =
            s.triangles.iter().map(|t| [t[0], t[1], t[2], eid(t[0], t[1]), eid(t[1], t[2]), eid(t[2], t[0])]).collect();
        let mut face_normals = Vec::with_capacity(faces.len());
        let mut face_areas = Vec::with_capacity(faces.len());
        for f in 0..faces.len() {
            let (n_out, a) = s.outward_normal_area(f);
            face_normals.push(-n_out);
            face_areas.push(a);
        }
        let mut acc = vec![Vec3::zeros(); nn];
        let mut touched_out = vec![false; nn];
        let mut touched_in = vec![false; nn];
        for (f, fnodes) in faces.iter().enumerate() {
            for &i in fnodes {
                acc[i] += face_areas[f] * face_normals[f];
                if s.gamma[f] {
                    touched_in[i] = true;
                } else {
                    touched_out[i] = true;
                }
            }
        }
        let node_normals: Vec<Vec3> = acc.iter().map(|v| v.normalize()).collect();
        let tangents = node_normals.iter().map(tangent_pair).collect();
        let patch_free = (0..nn).map(|i| touched_in[i] && !touched_out[i]).collect();
        let mut chi = body.chi.clone();
        chi.extend(edges.iter().map(|&(a, b)| 0.5 * (body.chi[a] + body.chi[b])));

        let mut qps = Vec::with_capacity(faces.len() * triangle_deg7().len());
        for (f, t) in s.triangles.iter().enumerate() {
            let [a, b, c] = s.corners(t);
            for q in triangle_deg7() {
                let x = q.bary[0] * a + q.bary[1] * b + q.bary[2] * c;
                qps.push(BoundaryQp { face: f, x, w: q.weight * face_areas[f], phi: p2_tri(&q.bary) });
            }
        }

        // mass and Laplace–Beltrami stiffness
        let mut mt = Vec::with_capacity(faces.len() * 36);
        for qp in &qps {
            let fnodes = &faces[qp.face];
            for i in 0..6 {
                for j in 0..6 {
                    mt.push((fnodes[i], fnodes[j], qp.w * qp.phi[i] * qp.phi[j]));
                }
            }
        }
        let mass = Csr::from_triplets(nn, nn, mt);
        let mut st = Vec::with_capacity(faces.len() * 36);
        for (f, t) in s.triangles.iter().enumerate() {
            let [a, b, c] = s.corners(t);
            let (e1, e2) = (b - a, c - a);
            let g = nalgebra::Matrix2::new(e1.dot(&e1), e1.dot(&e2), e1.dot(&e2), e2.dot(&e2));
            let gi = g.try_inverse().expect("degenerate surface triangle");
            for q in triangle_deg7() {
                let grads = p2_tri_grad_ref(&q.bary);
                let w = q.weight * face_areas[f];
                // surface gradient: J G⁻¹ ∇_ref
                let sg: Vec<Vec3> = grads
                    .iter()
                    .map(|gr| {
                        let c2 = gi * nalgebra::Vector2::new(gr[0], gr[1]);
                        e1 * c2[0] + e2 * c2[1]
                    })
                    .collect();
                for i in 0..6 {
                    for j in 0..6 {
                        st.push((faces[f][i], faces[f][j], w * sg[i].dot(&sg[j])));
                    }
                }
            }
        }
        let stiffness = Csr::from_triplets(nn, nn, st);
        Self {
            n_vertices: nv,
            edges,
            edge_index,
            nodes,
            faces,
            face_normals,
            face_areas,
            face_gamma: s.gamma.clone(),
            node_normals,
            tangents,
            patch_free,
            chi,
            mass,
            stiffness,
            qps,
            surrogate: OnceLock::new(),
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn qps(&self) -> &[BoundaryQp] {
        &self.qps
    }

    pub fn area(&self) -> f64 {
        self.face_areas.iter().sum()
    }

    #[inline]
    pub fn interp(&self, values: &[Vec3], qp: &BoundaryQp) -> Vec3 {
        let f = &self.faces[qp.face];
        (0..6).fold(Vec3::zeros(), |acc, i| acc + qp.phi[i] * values[f[i]])
    }

    #[inline]
    pub fn interp_scalar(&self, values: &[f64], qp: &BoundaryQp) -> f64 {
        let f = &self.faces[qp.face];
        (0..6).map(|i| qp.phi[i] * values[f[i]]).sum()
    }

    /// Nodal normal components `v_a · n_a`.
    pub fn normal_component(&self, values: &[Vec3]) -> Vec<f64> {
        values.iter().zip(&self.node_normals).map(|(v, n)| v.dot(n)).collect()
    }

    pub fn max_normal_component(&self, values: &[Vec3]) -> f64 {
        self.normal_component(values).iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    /// Removes the nodal normal component.
    pub fn project_tangential(&self, values: &[Vec3]) -> Vec<Vec3> {
        values.iter().zip(&self.node_normals).map(|(v, n)| v - n * v.dot(n)).collect()
    }

    /// Zeroes the values at nodes that touch faces outside Γ.
    pub fn restrict_patch(&self, values: &[Vec3]) -> Vec<Vec3> {
        values.iter().zip(&self.patch_free).map(|(v, &f)| if f { *v } else { Vec3::zeros() }).collect()
    }

    /// Applies the admissibility constraint of `kind` to nodal values.
    pub fn constrain(&self, values: &[Vec3], kind: TraceKind) -> TraceField {
        let v = match kind {
            TraceKind::Tangential => self.project_tangential(values),
            TraceKind::Localized => self.restrict_patch(values),
            TraceKind::General => values.to_vec(),
        };
        TraceField::new(v, kind)
    }

    /// Samples a function at the nodes.
    pub fn sample(&self, f: impl Fn(&Vec3) -> Vec3) -> Vec<Vec3> {
        self.nodes.iter().map(f).collect()
    }

    /// `∮ v dγ`.
    pub fn integral(&self, values: &[Vec3]) -> Vec3 {
        self.qps.iter().fold(Vec3::zeros(), |acc, q| acc + q.w * self.interp(values, q))
    }

    /// `∮ x × v dγ`.
    pub fn moment(&self, values: &[Vec3]) -> Vec3 {
        self.qps.iter().fold(Vec3::zeros(), |acc, q| acc + q.w * q.x.cross(&self.interp(values, q)))
    }

    pub fn integral_scalar(&self, values: &[f64]) -> f64 {
        self.qps.iter().map(|q| q.w * self.interp_scalar(values, q)).sum()
    }

    /// Flux `∮ (v·n) dγ` with the nodal normal rule.
    pub fn flux(&self, values: &[Vec3]) -> f64 {
        self.integral_scalar(&self.normal_component(values))
    }

    /// Flux `∮ v·n dγ` with the exact face normals (consistent with the
    /// divergence theorem on the polyhedral body).
    pub fn flux_exact(&self, values: &[Vec3]) -> f64 {
        self.qps.iter().map(|q| q.w * self.interp(values, q).dot(&self.face_normals[q.face])).sum()
    }

    /// `∮ s(x) b(x) dγ` where `s = (a·n)` interpolated from nodal values.
    /// Returns (force, torque) moments `(∮ s b, ∮ x × s b)`.
    pub fn weighted_moments(&self, s: &[f64], b: &[Vec3]) -> (Vec3, Vec3) {
        let mut f = Vec3::zeros();
        let mut t = Vec3::zeros();
        for q in &self.qps {
            let v = q.w * self.interp_scalar(s, q) * self.interp(b, q);
            f += v;
            t += q.x.cross(&v);
        }
        (f, t)
    }

    /// Assembles the nodal functional `F_a = ∮ g(qp) φ_a dγ`.
    pub fn functional(&self, g: impl Fn(&BoundaryQp) -> Vec3) -> Vec<Vec3> {
        let mut out = vec![Vec3::zeros(); self.n_nodes()];
        for q in &self.qps {
            let v = q.w * g(q);
            let f = &self.faces[q.face];
            for i in 0..6 {
                out[f[i]] += q.phi[i] * v;
            }
        }
        out
    }

    /// Nodal functional of an L² density: `(M v)_a`.
    pub fn mass_apply(&self, values: &[Vec3]) -> Vec<Vec3> {
        let mut out = vec![Vec3::zeros(); self.n_nodes()];
        for c in 0..3 {
            let x: Vec<f64> = values.iter().map(|v| v[c]).collect();
            let y = self.mass.matvec(&x);
            for (o, yi) in out.iter_mut().zip(y) {
                o[c] = yi;
            }
        }
        out
    }

    /// L² density of a nodal functional: `M⁻¹ F`.
    pub fn mass_solve(&self, functional: &[Vec3]) -> Vec<Vec3> {
        let mut out = vec![Vec3::zeros(); self.n_nodes()];
        for c in 0..3 {
            let b: Vec<f64> = functional.iter().map(|v| v[c]).collect();
            let (x, _) = cg(&self.mass, &b, 1e-15, 2000);
            for (o, xi) in out.iter_mut().zip(x) {
                o[c] = xi;
            }
        }
        out
    }

    /// `∮ a·b dγ` for quadratic traces.
    pub fn inner(&self, a: &[Vec3], b: &[Vec3]) -> f64 {
        self.mass_apply(a).iter().zip(b).map(|(x, y)| x.dot(y)).sum()
    }

    /// Trace-norm surrogate, built on first use.
    pub fn surrogate(&self) -> &SurrogateNorm {
        self.surrogate.get_or_init(|| SurrogateNorm::new(self))
    }
}

fn tangent_pair(n: &Vec3) -> [Vec3; 2] {
    let a = if n.x.abs() < 0.6 { Vec3::x() } else if n.y.abs() < 0.6 { Vec3::y() } else { Vec3::z() };
    let t1 = (a - n * a.dot(n)).normalize();
    [t1, n.cross(&t1)]
}

/// Reference gradients of [`p2_tri`] with respect to (λ1, λ2).
fn p2_tri_grad_ref(l: &[f64; 3]) -> [[f64; 2]; 6] {
    // dλ0 = (-1,-1), dλ1 = (1,0), dλ2 = (0,1)
    let d = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
    let mut g = [[0.0; 2]; 6];
    for i in 0..3 {
        for k in 0..2 {
            g[i][k] = (4.0 * l[i] - 1.0) * d[i][k];
        }
    }
    let pairs = [(0, 1), (1, 2), (2, 0)];
    for (m, &(i, j)) in pairs.iter().enumerate() {
        for k in 0..2 {
            g[3 + m][k] = 4.0 * (d[i][k] * l[j] + l[i] * d[j][k]);
        }
    }
    g
}

/// Discrete stand-in for the `W^{3/2,2}` boundary norm:
/// `‖v‖² = Σ_c v_cᵀ (M + M (M⁻¹S)^{3/2}) v_c` with the boundary mass `M` and
/// Laplace–Beltrami stiffness `S`; the fractional power is taken through
/// the generalized eigen-decomposition `S φ = λ M φ`.
#[derive(Debug)]
pub struct SurrogateNorm {
    /// The scalar norm matrix `N` (symmetric positive definite).
    pub n: DMatrix<f64>,
    /// Generalized eigenvalues of the boundary Laplacian.
    pub eigenvalues: DVector<f64>,
    tangential: OnceLock<(Vec<usize>, nalgebra::Cholesky<f64, nalgebra::Dyn>)>,
    localized: OnceLock<(Vec<usize>, Option<nalgebra::Cholesky<f64, nalgebra::Dyn>>)>,
    general: OnceLock<nalgebra::Cholesky<f64, nalgebra::Dyn>>,
}

impl SurrogateNorm {
    pub fn new(space: &SurfaceSpace) -> Self {
        let m = space.mass.to_dense();
        let s = space.stiffness.to_dense();
        let l = m.clone().cholesky().expect("boundary mass matrix must be SPD").l();
        let linv = l.clone().try_inverse().expect("invertible Cholesky factor");
        let c = &linv * &s * linv.transpose();
        let c = 0.5 * (&c + c.transpose());
        let eig = c.symmetric_eigen();
        let lam32 = eig.eigenvalues.map(|x| x.max(0.0).powf(1.5));
        let lq = &l * &eig.eigenvectors;
        let mut n = &m + &lq * DMatrix::from_diagonal(&lam32) * lq.transpose();
        n = 0.5 * (&n + n.transpose());
        Self {
            n,
            eigenvalues: eig.eigenvalues,
            tangential: OnceLock::new(),
            localized: OnceLock::new(),
            general: OnceLock::new(),
        }
    }

    /// `⟨a, b⟩` in the surrogate inner product.
    pub fn inner(&self, a: &[Vec3], b: &[Vec3]) -> f64 {
        let mut s = 0.0;
        for c in 0..3 {
            let x = DVector::from_iterator(a.len(), a.iter().map(|v| v[c]));
            let y = DVector::from_iterator(b.len(), b.iter().map(|v| v[c]));
            s += x.dot(&(&self.n * y));
        }
        s
    }

    pub fn norm(&self, a: &[Vec3]) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }

    /// Riesz representative in the admissible subspace of `kind`: the `g`
    /// with `⟨g, δ⟩ = Σ_a F_a·δ_a` for every admissible `δ`.
    pub fn riesz(&self, space: &SurfaceSpace, functional: &[Vec3], kind: TraceKind) -> Result<TraceField> {
        let nn = space.n_nodes();
        match kind {
            TraceKind::General => {
                let ch = self.general.get_or_init(|| self.n.clone().cholesky().expect("SPD norm matrix"));
                let mut out = vec![Vec3::zeros(); nn];
                for c in 0..3 {
                    let b = DVector::from_iterator(nn, functional.iter().map(|v| v[c]));
                    let x = ch.solve(&b);
                    for (o, xi) in out.iter_mut().zip(x.iter()) {
                        o[c] = *xi;
                    }
                }
                Ok(TraceField::new(out, kind))
            }
            TraceKind::Localized => {
                let (free, ch) = self.localized.get_or_init(|| {
                    let free: Vec<usize> = (0..nn).filter(|&i| space.patch_free[i]).collect();
                    let k = DMatrix::from_fn(free.len(), free.len(), |i, j| self.n[(free[i], free[j])]);
                    (free, if k.nrows() > 0 { k.cholesky() } else { None })
                });
                let ch = ch
                    .as_ref()
                    .ok_or_else(|| CoreError::DegenerateControl("no admissible nodes inside Γ".into()))?;
                let mut out = vec![Vec3::zeros(); nn];
                for c in 0..3 {
                    let b = DVector::from_iterator(free.len(), free.iter().map(|&i| functional[i][c]));
                    let x = ch.solve(&b);
                    for (k, &i) in free.iter().enumerate() {
                        out[i][c] = x[k];
                    }
                }
                Ok(TraceField::new(out, kind))
            }
            TraceKind::Tangential => {
                let (_, ch) = self.tangential.get_or_init(|| {
                    let k = DMatrix::from_fn(2 * nn, 2 * nn, |p, q| {
                        let (a, i) = (p / 2, p % 2);
                        let (b, j) = (q / 2, q % 2);
                        self.n[(a, b)] * space.tangents[a][i].dot(&space.tangents[b][j])
                    });
                    (Vec::new(), k.cholesky().expect("SPD tangential norm matrix"))
                });
                let b = DVector::from_iterator(
                    2 * nn,
                    (0..2 * nn).map(|p| functional[p / 2].dot(&space.tangents[p / 2][p % 2])),
                );
                let x = ch.solve(&b);
                let out =
                    (0..nn).map(|a| space.tangents[a][0] * x[2 * a] + space.tangents[a][1] * x[2 * a + 1]).collect();
                Ok(TraceField::new(out, kind))
            }
        }
    }
}
