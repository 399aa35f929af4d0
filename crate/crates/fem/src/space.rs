//! Taylor–Hood P2/P1 space on a tetrahedral mesh.
//!
//! Velocity nodes are the mesh points followed by the edge midpoints; local
//! node order on a tetrahedron is its four vertices, then the edges
//! 01, 02, 03, 12, 13, 23. Unknowns are ordered node-major for velocity
//! (`3·node + c`) followed by one pressure value per mesh point.

use std::collections::HashMap;

use selfprop_core::{SurfaceSpace, Vec3};

use crate::mesh::{ExteriorMesh, Tag, TetMesh};

pub const LOCAL_EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Gradients of the barycentric coordinates and volume of a tetrahedron.
#[derive(Debug, Clone, Copy)]
pub struct TetGeom {
    pub grad_l: [Vec3; 4],
    pub vol: f64,
}

impl TetGeom {
    pub fn new(p: &[Vec3; 4]) -> Self {
        let j = nalgebra::Matrix3::from_columns(&[p[1] - p[0], p[2] - p[0], p[3] - p[0]]);
        let det = j.determinant();
        let ji = j.try_inverse().expect("degenerate tetrahedron");
        let g1 = ji.row(0).transpose();
        let g2 = ji.row(1).transpose();
        let g3 = ji.row(2).transpose();
        Self { grad_l: [-(g1 + g2 + g3), g1, g2, g3], vol: det.abs() / 6.0 }
    }
}

/// Quadratic Lagrange basis values at barycentric point `l`.
pub fn p2_values(l: &[f64; 4]) -> [f64; 10] {
    let mut out = [0.0; 10];
    for i in 0..4 {
        out[i] = l[i] * (2.0 * l[i] - 1.0);
    }
    for (e, &(i, j)) in LOCAL_EDGES.iter().enumerate() {
        out[4 + e] = 4.0 * l[i] * l[j];
    }
    out
}

/// Quadratic Lagrange basis gradients at barycentric point `l`.
pub fn p2_grads(l: &[f64; 4], g: &TetGeom) -> [Vec3; 10] {
    let mut out = [Vec3::zeros(); 10];
    for i in 0..4 {
        out[i] = (4.0 * l[i] - 1.0) * g.grad_l[i];
    }
    for (e, &(i, j)) in LOCAL_EDGES.iter().enumerate() {
        out[4 + e] = 4.0 * (l[j] * g.grad_l[i] + l[i] * g.grad_l[j]);
    }
    out
}

/// Quadratic basis Hessians (constant per cell).
pub fn p2_hessians(g: &TetGeom) -> [nalgebra::Matrix3<f64>; 10] {
    let mut out = [nalgebra::Matrix3::zeros(); 10];
    for i in 0..4 {
        out[i] = 4.0 * g.grad_l[i] * g.grad_l[i].transpose();
    }
    for (e, &(i, j)) in LOCAL_EDGES.iter().enumerate() {
        out[4 + e] = 4.0 * (g.grad_l[i] * g.grad_l[j].transpose() + g.grad_l[j] * g.grad_l[i].transpose());
    }
    out
}

/// Degree-of-freedom layout of the mixed space.
#[derive(Debug, Clone)]
pub struct MixedSpace {
    pub n_points: usize,
    pub edges: Vec<(usize, usize)>,
    /// Ten velocity nodes per tetrahedron.
    pub tet_nodes: Vec<[usize; 10]>,
    pub node_pos: Vec<Vec3>,
    /// Tag of every boundary node (`None` for interior nodes).
    pub node_tag: Vec<Option<Tag>>,
    /// Boundary faces as six P2 nodes (vertices, then edges 01, 12, 20),
    /// with the unit normal out of the domain and the area.
    pub bface_nodes: Vec<[usize; 6]>,
    pub bface_normal: Vec<Vec3>,
    pub bface_area: Vec<f64>,
    pub bface_tag: Vec<Tag>,
    /// Mesh node of every surface-space node (exterior meshes only).
    pub body_nodes: Vec<usize>,
    /// Far-field boundary nodes, sorted.
    pub far_nodes: Vec<usize>,
}

impl MixedSpace {
    pub fn new(mesh: &TetMesh) -> Self {
        let np = mesh.n_points();
        let mut edges: Vec<(usize, usize)> = mesh
            .tets
            .iter()
            .flat_map(|t| LOCAL_EDGES.iter().map(move |&(i, j)| (t[i].min(t[j]), t[i].max(t[j]))))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        let edge_index: HashMap<(usize, usize), usize> = edges.iter().enumerate().map(|(i, &e)| (e, np + i)).collect();
        let eid = |a: usize, b: usize| edge_index[&(a.min(b), a.max(b))];
        let tet_nodes = mesh
            .tets
            .iter()
            .map(|t| {
                let mut n = [0usize; 10];
                n[..4].copy_from_slice(t);
                for (e, &(i, j)) in LOCAL_EDGES.iter().enumerate() {
                    n[4 + e] = eid(t[i], t[j]);
                }
                n
            })
            .collect();
        let mut node_pos = mesh.points.clone();
        node_pos.extend(edges.iter().map(|&(a, b)| 0.5 * (mesh.points[a] + mesh.points[b])));
        let mut node_tag = vec![None; node_pos.len()];
        let mut bface_nodes = Vec::with_capacity(mesh.faces.len());
        let mut bface_normal = Vec::with_capacity(mesh.faces.len());
        let mut bface_area = Vec::with_capacity(mesh.faces.len());
        let mut bface_tag = Vec::with_capacity(mesh.faces.len());
        for (f, face) in mesh.faces.iter().enumerate() {
            let [a, b, c] = face.nodes;
            let nodes = [a, b, c, eid(a, b), eid(b, c), eid(c, a)];
            for &n in &nodes {
                // body takes precedence on the (empty for valid meshes) overlap
                if node_tag[n] != Some(Tag::Body) {
                    node_tag[n] = Some(face.tag);
                }
            }
            let (nrm, area) = mesh.face_normal_area(f);
            bface_nodes.push(nodes);
            bface_normal.push(nrm);
            bface_area.push(area);
            bface_tag.push(face.tag);
        }
        let far_nodes = (0..node_pos.len()).filter(|&n| node_tag[n] == Some(Tag::Far)).collect();
        Self {
            n_points: np,
            edges,
            tet_nodes,
            node_pos,
            node_tag,
            bface_nodes,
            bface_normal,
            bface_area,
            bface_tag,
            body_nodes: Vec::new(),
            far_nodes,
        }
    }

    /// Space on an exterior mesh, with the surface-node map filled in.
    pub fn exterior(ext: &ExteriorMesh, surface: &SurfaceSpace) -> Self {
        let mut s = Self::new(&ext.mesh);
        let edge_index: HashMap<(usize, usize), usize> =
            s.edges.iter().enumerate().map(|(i, &e)| (e, s.n_points + i)).collect();
        let mut map: Vec<usize> = (0..surface.n_vertices).collect();
        map.extend(surface.edges.iter().map(|e| edge_index[e]));
        debug_assert!(map.iter().all(|&n| s.node_tag[n] == Some(Tag::Body)));
        s.body_nodes = map;
        s
    }

    pub fn n_nodes(&self) -> usize {
        self.node_pos.len()
    }

    pub fn n_velocity(&self) -> usize {
        3 * self.n_nodes()
    }

    pub fn n_dofs(&self) -> usize {
        3 * self.n_nodes() + self.n_points
    }

    #[inline]
    pub fn pressure_dof(&self, vertex: usize) -> usize {
        3 * self.n_nodes() + vertex
    }

    /// Velocity of node `n` in a full unknown vector.
    #[inline]
    pub fn velocity(&self, x: &[f64], n: usize) -> Vec3 {
        Vec3::new(x[3 * n], x[3 * n + 1], x[3 * n + 2])
    }

    #[inline]
    pub fn set_velocity(&self, x: &mut [f64], n: usize, v: &Vec3) {
        x[3 * n..3 * n + 3].copy_from_slice(v.as_slice());
    }

    pub fn pressure<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        &x[3 * self.n_nodes()..]
    }

    /// Boundary velocity unknowns (every tagged node).
    pub fn is_boundary_dof(&self, dof: usize) -> bool {
        dof < self.n_velocity() && self.node_tag[dof / 3].is_some()
    }

    /// Interpolates a velocity and pressure into a full unknown vector.
    pub fn interpolate(&self, u: impl Fn(&Vec3) -> Vec3, p: impl Fn(&Vec3) -> f64) -> Vec<f64> {
        let mut x = vec![0.0; self.n_dofs()];
        for (n, pos) in self.node_pos.iter().enumerate() {
            self.set_velocity(&mut x, n, &u(pos));
        }
        let off = 3 * self.n_nodes();
        for v in 0..self.n_points {
            x[off + v] = p(&self.node_pos[v]);
        }
        x
    }

    /// Body trace of a full vector, as surface-space nodal values.
    pub fn body_trace(&self, x: &[f64]) -> Vec<Vec3> {
        self.body_nodes.iter().map(|&n| self.velocity(x, n)).collect()
    }

    /// Gathers the velocity-row entries of a functional at the body nodes.
    pub fn body_functional(&self, r: &[f64]) -> Vec<Vec3> {
        self.body_nodes.iter().map(|&n| Vec3::new(r[3 * n], r[3 * n + 1], r[3 * n + 2])).collect()
    }
}
