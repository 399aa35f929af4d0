//! Closed, consistently oriented triangulated body surfaces.
//!
//! # ASCII body format
//!
//! ```text
//! # comments start with '#'
//! selfprop-body 1
//! vertices <N>
//! <x> <y> <z>            (N lines)
//! triangles <M>
//! <i> <j> <k> <tag>      (M lines, 0-based, tag 1 = control patch Γ, 0 = not)
//! ```
//!
//! Triangles are oriented counter-clockwise when seen from the fluid, so the
//! right-hand normal points out of the body. The fluid-domain normal `n`
//! used in boundary integrals is the opposite one.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::{CoreError, Result, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
    /// Per-triangle flag: part of the control patch Γ.
    pub gamma: Vec<bool>,
}

impl Surface {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>, gamma: Vec<bool>) -> Result<Self> {
        if gamma.len() != triangles.len() {
            return Err(CoreError::Geometry(format!(
                "{} triangles but {} patch tags",
                triangles.len(),
                gamma.len()
            )));
        }
        let s = Self { vertices, triangles, gamma };
        s.check_closed()?;
        Ok(s)
    }

    /// Checks that every directed edge is matched by exactly one reversed
    /// edge (closed, consistently oriented, manifold) and that the enclosed
    /// volume is positive.
    pub fn check_closed(&self) -> Result<()> {
        if self.triangles.is_empty() {
            return Err(CoreError::Geometry("surface has no triangles".into()));
        }
        let nv = self.vertices.len();
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for (f, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&i| i >= nv) {
                return Err(CoreError::Geometry(format!("triangle {f} references a missing vertex")));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(CoreError::Geometry(format!("triangle {f} is degenerate")));
            }
            for k in 0..3 {
                let e = (t[k], t[(k + 1) % 3]);
                if directed.insert(e, f).is_some() {
                    return Err(CoreError::Geometry(format!(
                        "edge ({}, {}) used twice with the same orientation (triangle {f})",
                        e.0, e.1
                    )));
                }
            }
        }
        for (&(a, b), &f) in &directed {
            if !directed.contains_key(&(b, a)) {
                return Err(CoreError::Geometry(format!(
                    "surface is open: edge ({a}, {b}) of triangle {f} has no partner"
                )));
            }
        }
        let vol: f64 = self
            .triangles
            .iter()
            .map(|t| {
                let [a, b, c] = self.corners(t);
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum();
        if vol <= 0.0 {
            return Err(CoreError::Geometry(format!(
                "surface is inverted (enclosed volume {vol:.3e} ≤ 0)"
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn corners(&self, t: &[usize; 3]) -> [Vec3; 3] {
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    /// Unit normal pointing out of the body (right-hand rule) and area.
    pub fn outward_normal_area(&self, f: usize) -> (Vec3, f64) {
        let [a, b, c] = self.corners(&self.triangles[f]);
        let cr = (b - a).cross(&(c - a));
        let n2 = cr.norm();
        (cr / n2, 0.5 * n2)
    }

    pub fn max_edge(&self) -> f64 {
        self.edges().iter().map(|&(a, b)| (self.vertices[a] - self.vertices[b]).norm()).fold(0.0, f64::max)
    }

    pub fn min_edge(&self) -> f64 {
        self.edges()
            .iter()
            .map(|&(a, b)| (self.vertices[a] - self.vertices[b]).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Undirected edges `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|t| (0..3).map(move |k| (t[k].min(t[(k + 1) % 3]), t[k].max(t[(k + 1) % 3]))))
            .collect();
        e.sort_unstable();
        e.dedup();
        e
    }

    /// Largest distance of a vertex from the origin.
    pub fn circumradius(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Smallest distance of a vertex from the origin.
    pub fn inradius_vertices(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min)
    }

    /// True when every face is seen from the origin under a positive solid
    /// angle and the solid angles sum to 4π, i.e. the body is star-shaped
    /// with respect to the origin and radial projection is one-to-one.
    pub fn is_star_shaped(&self) -> bool {
        let mut total = 0.0;
        for t in &self.triangles {
            let [a, b, c] = self.corners(t);
            let omega = solid_angle(&a, &b, &c);
            if omega <= 0.0 {
                return false;
            }
            total += omega;
        }
        (total - 4.0 * std::f64::consts::PI).abs() < 1e-8
    }

    pub fn translated(&self, d: Vec3) -> Self {
        let mut s = self.clone();
        s.vertices.iter_mut().for_each(|v| *v += d);
        s
    }

    pub fn transformed(&self, q: &crate::Mat3) -> Self {
        let mut s = self.clone();
        s.vertices.iter_mut().for_each(|v| *v = q * *v);
        if q.determinant() < 0.0 {
            s.triangles.iter_mut().for_each(|t| t.swap(1, 2));
        }
        s
    }

    /// Flat 1→4 midpoint subdivision; patch tags are inherited. If
    /// `project_radius` is given, new vertices are projected onto that sphere.
    pub fn subdivided(&self, project_radius: Option<f64>) -> Self {
        let mut verts = self.vertices.clone();
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut get = |a: usize, b: usize, verts: &mut Vec<Vec3>| -> usize {
            let key = (a.min(b), a.max(b));
            *mid.entry(key).or_insert_with(|| {
                let mut p = 0.5 * (verts[a] + verts[b]);
                if let Some(r) = project_radius {
                    p *= r / p.norm();
                }
                verts.push(p);
                verts.len() - 1
            })
        };
        let mut tris = Vec::with_capacity(4 * self.triangles.len());
        let mut gamma = Vec::with_capacity(4 * self.triangles.len());
        for (t, &g) in self.triangles.iter().zip(&self.gamma) {
            let ab = get(t[0], t[1], &mut verts);
            let bc = get(t[1], t[2], &mut verts);
            let ca = get(t[2], t[0], &mut verts);
            tris.extend_from_slice(&[[t[0], ab, ca], [ab, t[1], bc], [ca, bc, t[2]], [ab, bc, ca]]);
            gamma.extend_from_slice(&[g; 4]);
        }
        Self { vertices: verts, triangles: tris, gamma }
    }

    /// Icosphere of the given radius: the icosahedron refined `level` times
    /// with vertices projected to the sphere. Γ is left empty.
    pub fn icosphere(level: u32, radius: f64) -> Self {
        let p = (1.0 + 5f64.sqrt()) / 2.0;
        let raw = [
            [-1.0, p, 0.0],
            [1.0, p, 0.0],
            [-1.0, -p, 0.0],
            [1.0, -p, 0.0],
            [0.0, -1.0, p],
            [0.0, 1.0, p],
            [0.0, -1.0, -p],
            [0.0, 1.0, -p],
            [p, 0.0, -1.0],
            [p, 0.0, 1.0],
            [-p, 0.0, -1.0],
            [-p, 0.0, 1.0],
        ];
        let vertices: Vec<Vec3> = raw.iter().map(|c| Vec3::new(c[0], c[1], c[2]).normalize() * radius).collect();
        let triangles = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        let gamma = vec![false; triangles.len()];
        let mut s = Self { vertices, triangles, gamma };
        for _ in 0..level {
            s = s.subdivided(Some(radius));
        }
        s
    }

    /// Marks as Γ every face whose centroid satisfies `pred`.
    pub fn with_gamma(mut self, pred: impl Fn(&Vec3) -> bool) -> Self {
        for (f, t) in self.triangles.iter().enumerate() {
            let [a, b, c] = [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]];
            self.gamma[f] = pred(&((a + b + c) / 3.0));
        }
        self
    }

    pub fn parse(text: &str) -> Result<Self> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        let perr = |line: usize, msg: &str| CoreError::Parse { line, msg: msg.to_string() };
        let last = text.lines().count();
        let mut pos = 0usize;
        let mut next = |what: &str| -> Result<(usize, &str)> {
            let r = lines.get(pos).copied().ok_or_else(|| perr(last, &format!("unexpected end of file: {what}")))?;
            pos += 1;
            Ok(r)
        };
        let (ln, header) = next("header")?;
        let hw: Vec<&str> = header.split_whitespace().collect();
        if hw.first() != Some(&"selfprop-body") {
            return Err(perr(ln, "expected header 'selfprop-body 1'"));
        }
        if hw.get(1) != Some(&"1") || hw.len() != 2 {
            return Err(perr(ln, "unsupported body format version"));
        }
        let section = |(ln, l): (usize, &str), key: &str| -> Result<usize> {
            let w: Vec<&str> = l.split_whitespace().collect();
            if w.len() != 2 || w[0] != key {
                return Err(perr(ln, &format!("expected '{key} <count>'")));
            }
            w[1].parse().map_err(|_| perr(ln, &format!("bad {key} count")))
        };
        let nv = section(next("vertices")?, "vertices")?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (ln, l) = next("vertex list")?;
            let c: Vec<f64> = l
                .split_whitespace()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| perr(ln, "vertex coordinates must be numbers"))?;
            if c.len() != 3 || c.iter().any(|x| !x.is_finite()) {
                return Err(perr(ln, "vertex needs three finite coordinates"));
            }
            vertices.push(Vec3::new(c[0], c[1], c[2]));
        }
        let nt = section(next("triangles")?, "triangles")?;
        let mut triangles = Vec::with_capacity(nt);
        let mut gamma = Vec::with_capacity(nt);
        for _ in 0..nt {
            let (ln, l) = next("triangle list")?;
            let c: Vec<usize> = l
                .split_whitespace()
                .map(|s| s.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| perr(ln, "triangle entries must be non-negative integers"))?;
            if c.len() != 4 || c[3] > 1 {
                return Err(perr(ln, "triangle needs 'i j k tag' with tag 0 or 1"));
            }
            triangles.push([c[0], c[1], c[2]]);
            gamma.push(c[3] == 1);
        }
        if let Some(&(ln, _)) = lines.get(pos) {
            return Err(perr(ln, "unexpected trailing content"));
        }
        Self::new(vertices, triangles, gamma)
    }

    pub fn to_ascii(&self) -> String {
        let mut s = String::new();
        s.push_str("selfprop-body 1\n");
        let _ = writeln!(s, "vertices {}", self.vertices.len());
        for v in &self.vertices {
            let _ = writeln!(s, "{:e} {:e} {:e}", v.x, v.y, v.z);
        }
        let _ = writeln!(s, "triangles {}", self.triangles.len());
        for (t, g) in self.triangles.iter().zip(&self.gamma) {
            let _ = writeln!(s, "{} {} {} {}", t[0], t[1], t[2], u8::from(*g));
        }
        s
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// Signed solid angle of the triangle (a, b, c) seen from the origin
/// (Van Oosterom–Strackee).
pub fn solid_angle(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
    let num = a.dot(&b.cross(c));
    let den = la * lb * lc + a.dot(b) * lc + a.dot(c) * lb + b.dot(c) * la;
    2.0 * num.atan2(den)
}
