//! Mesh cache files and legacy-VTK field dumps.
//!
//! Cache layout (little endian): 8-byte magic, u32 format version, then the
//! exterior-mesh parameters, the body surface with Γ flags and χ, the mesh
//! points, cells, boundary faces and the body-face map.

use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};
use selfprop_core::{BodyGeometry, Surface, Vec3};

use crate::mesh::{BoundaryFace, ExteriorMesh, Tag, TetMesh};
use crate::space::MixedSpace;
use crate::{FemError, Result};

pub const MESH_MAGIC: &[u8; 8] = b"SPMESH\0\0";
pub const MESH_VERSION: u32 = 1;

struct Writer(Vec<u8>);

impl Writer {
    fn u64(&mut self, v: usize) {
        self.0.extend_from_slice(&(v as u64).to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn vec3(&mut self, v: &Vec3) {
        v.iter().for_each(|&c| self.f64(c));
    }
}

struct Reader<'a> {
    b: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.pos + n > self.b.len() {
            return Err(FemError::Cache("truncated mesh cache".into()));
        }
        let s = &self.b[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u64(&mut self) -> Result<usize> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()) as usize)
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn vec3(&mut self) -> Result<Vec3> {
        Ok(Vec3::new(self.f64()?, self.f64()?, self.f64()?))
    }
    fn len(&mut self, max: usize) -> Result<usize> {
        let n = self.u64()?;
        if n > max {
            return Err(FemError::Cache(format!("implausible length {n} in mesh cache")));
        }
        Ok(n)
    }
}

/// Serializes an exterior mesh.
pub fn mesh_to_bytes(ext: &ExteriorMesh) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MESH_MAGIC);
    w.0.extend_from_slice(&MESH_VERSION.to_le_bytes());
    w.f64(ext.r_far);
    w.f64(ext.h);
    w.u64(ext.layers);
    let s = &ext.body.surface;
    w.u64(s.vertices.len());
    s.vertices.iter().for_each(|v| w.vec3(v));
    w.u64(s.triangles.len());
    for (t, &g) in s.triangles.iter().zip(&s.gamma) {
        t.iter().for_each(|&i| w.u64(i));
        w.u64(g as usize);
    }
    ext.body.chi.iter().for_each(|&c| w.f64(c));
    let m = &ext.mesh;
    w.u64(m.points.len());
    m.points.iter().for_each(|p| w.vec3(p));
    w.u64(m.tets.len());
    m.tets.iter().for_each(|t| t.iter().for_each(|&i| w.u64(i)));
    w.u64(m.faces.len());
    for f in &m.faces {
        f.nodes.iter().for_each(|&i| w.u64(i));
        w.u64(matches!(f.tag, Tag::Far) as usize);
        w.u64(f.tet);
    }
    w.u64(ext.body_faces.len());
    ext.body_faces.iter().for_each(|&i| w.u64(i));
    w.0
}

/// Restores an exterior mesh written by [`mesh_to_bytes`].
pub fn mesh_from_bytes(b: &[u8]) -> Result<ExteriorMesh> {
    let mut r = Reader { b, pos: 0 };
    if r.take(8)? != MESH_MAGIC {
        return Err(FemError::Cache("not a mesh cache file".into()));
    }
    let version = u32::from_le_bytes(r.take(4)?.try_into().unwrap());
    if version != MESH_VERSION {
        return Err(FemError::Cache(format!("mesh cache version {version}, expected {MESH_VERSION}")));
    }
    let max = b.len() / 8;
    let r_far = r.f64()?;
    let h = r.f64()?;
    let layers = r.u64()?;
    let nv = r.len(max)?;
    let vertices = (0..nv).map(|_| r.vec3()).collect::<Result<Vec<_>>>()?;
    let nt = r.len(max)?;
    let mut triangles = Vec::with_capacity(nt);
    let mut gamma = Vec::with_capacity(nt);
    for _ in 0..nt {
        triangles.push([r.u64()?, r.u64()?, r.u64()?]);
        gamma.push(r.u64()? != 0);
    }
    let chi = (0..nv).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    let surface = Surface::new(vertices, triangles, gamma)?;
    let mut body = BodyGeometry::new(surface)?;
    body.chi = chi;
    let np = r.len(max)?;
    let points = (0..np).map(|_| r.vec3()).collect::<Result<Vec<_>>>()?;
    let ntet = r.len(max)?;
    let tets = (0..ntet).map(|_| Ok([r.u64()?, r.u64()?, r.u64()?, r.u64()?])).collect::<Result<Vec<_>>>()?;
    let nf = r.len(max)?;
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let nodes = [r.u64()?, r.u64()?, r.u64()?];
        let tag = if r.u64()? == 1 { Tag::Far } else { Tag::Body };
        faces.push(BoundaryFace { nodes, tag, tet: r.u64()? });
    }
    let nb = r.len(max)?;
    let body_faces = (0..nb).map(|_| r.u64()).collect::<Result<Vec<_>>>()?;
    if r.pos != b.len() {
        return Err(FemError::Cache("trailing bytes in mesh cache".into()));
    }
    let bad = tets.iter().flatten().chain(faces.iter().flat_map(|f| f.nodes.iter())).any(|&i| i >= np);
    if bad || body_faces.iter().any(|&f| f >= nf) || faces.iter().any(|f| f.tet >= ntet) {
        return Err(FemError::Cache("index out of range in mesh cache".into()));
    }
    Ok(ExteriorMesh { mesh: TetMesh { points, tets, faces }, body, r_far, h, layers, body_faces })
}

/// Hex SHA-256 of the serialized mesh.
pub fn mesh_hash(ext: &ExteriorMesh) -> String {
    hex::encode(Sha256::digest(mesh_to_bytes(ext)))
}

/// Writes `bytes` to `path` atomically (temporary file, then rename).
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn save_mesh(path: &Path, ext: &ExteriorMesh) -> Result<()> {
    write_atomic(path, &mesh_to_bytes(ext))
}

pub fn load_mesh(path: &Path) -> Result<ExteriorMesh> {
    mesh_from_bytes(&std::fs::read(path)?)
}

/// Legacy-VTK unstructured grid with the velocity and pressure at the mesh
/// vertices (quadratic data are sampled at the vertices).
pub fn vtk_string(mesh: &TetMesh, space: &MixedSpace, x: &[f64]) -> String {
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\nflow field\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    s.push_str(&format!("POINTS {} double\n", mesh.n_points()));
    for p in &mesh.points {
        s.push_str(&format!("{:.17e} {:.17e} {:.17e}\n", p.x, p.y, p.z));
    }
    s.push_str(&format!("CELLS {} {}\n", mesh.n_tets(), 5 * mesh.n_tets()));
    for t in &mesh.tets {
        s.push_str(&format!("4 {} {} {} {}\n", t[0], t[1], t[2], t[3]));
    }
    s.push_str(&format!("CELL_TYPES {}\n", mesh.n_tets()));
    for _ in &mesh.tets {
        s.push_str("10\n");
    }
    s.push_str(&format!("POINT_DATA {}\nVECTORS velocity double\n", mesh.n_points()));
    for n in 0..mesh.n_points() {
        let v = space.velocity(x, n);
        s.push_str(&format!("{:.17e} {:.17e} {:.17e}\n", v.x, v.y, v.z));
    }
    s.push_str("SCALARS pressure double 1\nLOOKUP_TABLE default\n");
    for p in space.pressure(x) {
        s.push_str(&format!("{p:.17e}\n"));
    }
    s
}

pub fn write_vtk(path: &Path, mesh: &TetMesh, space: &MixedSpace, x: &[f64]) -> Result<()> {
    write_atomic(path, vtk_string(mesh, space, x).as_bytes())
}
