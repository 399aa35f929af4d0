//! Six basic rigid-motion problems, their tractions, the corrector control
//! fields and the 6×6 corrector matrix.

use std::path::Path;

use nalgebra::{Matrix6, Vector6};
use selfprop_core::{RigidMotion, TraceField, TraceKind, Vec3};
use selfprop_fem::io::{mesh_hash, write_atomic};
use selfprop_fem::{Discretization, FarRule, OseenSolver};
use sha2::{Digest, Sha256};

use crate::surf::{apply, rigid_traces};
use crate::{ControlError, Result};

/// Condition numbers above this are treated as singular.
pub const MAX_COND: f64 = 1e12;

/// The propulsion basis of one rigid motion and control kind.
#[derive(Debug, Clone)]
pub struct PropulsionBasis {
    pub motion: RigidMotion,
    pub kind: TraceKind,
    /// Solutions of the transposed (basic-motion) problems with body traces
    /// `e_i` (i < 3) and `e_{i−3} × x`, zero far data.
    pub basic: Vec<Vec<f64>>,
    /// Tractions `g⁽ⁱ⁾`, `G⁽ⁱ⁾` of the basic motions (L² densities).
    pub tractions: Vec<TraceField>,
    /// Corrector control fields `b_j`.
    pub fields: Vec<TraceField>,
    /// Forward lifts of the control fields (template far data).
    pub lifts: Vec<Vec<f64>>,
    /// `A_ij = ∮ σ(basic_j)n · b_i`, read through the residual of the basic
    /// motion on the extended trace of `b_i`.
    pub a: Matrix6<f64>,
    pub cond: f64,
}

/// Transposed solves with the six rigid body traces.
pub fn solve_basic_motions(disc: &Discretization, solver: &OseenSolver) -> Result<Vec<Vec<f64>>> {
    let data = rigid_traces(&disc.surface)
        .iter()
        .map(|w| disc.dirichlet_with(w, FarRule::Homogeneous))
        .collect::<selfprop_fem::Result<Vec<_>>>()?;
    let loads = vec![disc.zeros(); 6];
    Ok(solver.solve_many(&data, &loads, true)?)
}

/// Boundary residual functional of a basic motion: `∮ σ(y)n·φ` on every
/// boundary velocity row.
pub fn basic_functional(disc: &Discretization, solver: &OseenSolver, y: &[f64]) -> Vec<f64> {
    let mut r = solver.residual_transpose(y, &disc.zeros());
    for (d, v) in r.iter_mut().enumerate() {
        if !disc.space.is_boundary_dof(d) {
            *v = 0.0;
        }
    }
    r
}

/// Traction densities of the basic motions.
pub fn traction_basis(disc: &Discretization, solver: &OseenSolver, basic: &[Vec<f64>]) -> Vec<TraceField> {
    basic
        .iter()
        .map(|y| {
            let r = basic_functional(disc, solver, y);
            TraceField::new(disc.surface.mass_solve(&disc.space.body_functional(&r)), TraceKind::General)
        })
        .collect()
}

/// Corrector fields `(g×n)×n` (tangential) or `χ g` (localized).
pub fn control_basis(disc: &Discretization, tractions: &[TraceField], kind: TraceKind) -> Result<Vec<TraceField>> {
    let s = &disc.surface;
    match kind {
        TraceKind::Tangential => Ok(tractions
            .iter()
            .map(|g| {
                let t = s.project_tangential(&g.values);
                TraceField::new(t.iter().map(|v| -v).collect(), kind)
            })
            .collect()),
        TraceKind::Localized => {
            let live = s.chi.iter().zip(&s.patch_free).any(|(&c, &f)| f && c > 0.0);
            if !live {
                return Err(selfprop_core::CoreError::DegenerateControl("χ vanishes on every admissible node of Γ".into()).into());
            }
            Ok(tractions
                .iter()
                .map(|g| {
                    let v: Vec<Vec3> = g.values.iter().zip(&s.chi).map(|(v, c)| *c * v).collect();
                    s.constrain(&v, kind)
                })
                .collect())
        }
        TraceKind::General => Err(ControlError::Invalid("control kind must be tangential or localized".into())),
    }
}

/// `A_ij = s_j(T b_i)` with `s_j` the boundary functional of basic motion j
/// and `T` the far-template extension.
pub fn assemble_a(disc: &Discretization, solver: &OseenSolver, basic: &[Vec<f64>], fields: &[TraceField]) -> Result<(Matrix6<f64>, f64)> {
    let pulled: Vec<Vec<Vec3>> = basic.iter().map(|y| disc.far.pull_back(&disc.space, &basic_functional(disc, solver, y))).collect();
    let a = Matrix6::from_fn(|i, j| apply(&pulled[j], &fields[i].values));
    let cond = condition(&a);
    log::info!("corrector matrix condition number {cond:.3e}");
    if !cond.is_finite() || cond > MAX_COND {
        return Err(ControlError::SingularCorrector { cond });
    }
    Ok((a, cond))
}

pub fn condition(a: &Matrix6<f64>) -> f64 {
    let sv = a.singular_values();
    let (lo, hi) = (sv.min(), sv.max());
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

impl PropulsionBasis {
    pub fn new(disc: &Discretization, solver: &OseenSolver, kind: TraceKind) -> Result<Self> {
        let basic = solve_basic_motions(disc, solver)?;
        let tractions = traction_basis(disc, solver, &basic);
        let fields = control_basis(disc, &tractions, kind)?;
        let (a, cond) = assemble_a(disc, solver, &basic, &fields)?;
        let data: Vec<Vec<f64>> = fields.iter().map(|b| disc.dirichlet(&b.values)).collect();
        let lifts = solver.solve_many(&data, &vec![disc.zeros(); 6], false)?;
        Ok(Self { motion: solver.op.motion, kind, basic, tractions, fields, lifts, a, cond })
    }

    /// `Σ c_j b_j`.
    pub fn combine(&self, c: &Vector6<f64>) -> Vec<Vec3> {
        let mut out = vec![Vec3::zeros(); self.fields[0].len()];
        for (j, b) in self.fields.iter().enumerate() {
            crate::surf::axpy(&mut out, c[j], &b.values);
        }
        out
    }

    /// Solves `Aᵀ c = r` (the state and linearized closures).
    pub fn solve_t(&self, r: &Vector6<f64>) -> Vector6<f64> {
        self.a.transpose().lu().solve(r).expect("corrector matrix checked at construction")
    }

    /// Solves `A μ = r` (the adjoint closure).
    pub fn solve(&self, r: &Vector6<f64>) -> Vector6<f64> {
        self.a.lu().solve(r).expect("corrector matrix checked at construction")
    }

    /// Smallest eigenvalue of the L² Gram matrix of the control fields.
    pub fn gram_min_eigenvalue(&self, disc: &Discretization) -> f64 {
        let g = Matrix6::from_fn(|i, j| disc.surface.inner(&self.fields[i].values, &self.fields[j].values));
        g.symmetric_eigenvalues().min()
    }
}

// ---- cache ---------------------------------------------------------------

const MAGIC: &[u8; 8] = b"SPBASIS\x01";

/// Cache key from the mesh hash, the motion, the kind and the χ hash.
pub fn cache_key(disc: &Discretization, motion: &RigidMotion, kind: TraceKind) -> String {
    let mut h = Sha256::new();
    h.update(mesh_hash(&disc.ext).as_bytes());
    for v in motion.xi.iter().chain(motion.omega.iter()) {
        h.update(v.to_le_bytes());
    }
    h.update(kind.name().as_bytes());
    let mut hc = Sha256::new();
    for c in &disc.surface.chi {
        hc.update(c.to_le_bytes());
    }
    h.update(hc.finalize());
    hex::encode(h.finalize())
}

fn put_f64s(out: &mut Vec<u8>, v: &[f64]) {
    out.extend_from_slice(&(v.len() as u64).to_le_bytes());
    for x in v {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

pub fn basis_to_bytes(b: &PropulsionBasis, key: &str) -> Vec<u8> {
    let mut out = MAGIC.to_vec();
    out.extend_from_slice(&(key.len() as u64).to_le_bytes());
    out.extend_from_slice(key.as_bytes());
    out.push(match b.kind {
        TraceKind::Tangential => 0,
        TraceKind::Localized => 1,
        TraceKind::General => 2,
    });
    let m: Vec<f64> = b.motion.xi.iter().chain(b.motion.omega.iter()).copied().collect();
    put_f64s(&mut out, &m);
    for v in &b.basic {
        put_f64s(&mut out, v);
    }
    for v in &b.lifts {
        put_f64s(&mut out, v);
    }
    for t in b.tractions.iter().chain(&b.fields) {
        put_f64s(&mut out, &t.flat());
    }
    put_f64s(&mut out, b.a.as_slice());
    put_f64s(&mut out, &[b.cond]);
    out
}

struct Reader<'a> {
    b: &'a [u8],
    at: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.b.len()).ok_or_else(|| ControlError::Cache("truncated basis cache".into()))?;
        let s = &self.b[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self) -> Result<Vec<f64>> {
        let n = self.u64()? as usize;
        let raw = self.take(n.checked_mul(8).ok_or_else(|| ControlError::Cache("bad length".into()))?)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

pub fn basis_from_bytes(bytes: &[u8], key: &str, n_dofs: usize, n_nodes: usize) -> Result<PropulsionBasis> {
    let mut r = Reader { b: bytes, at: 0 };
    if r.take(8)? != MAGIC {
        return Err(ControlError::Cache("not a basis cache (bad magic or version)".into()));
    }
    let klen = r.u64()? as usize;
    if r.take(klen)? != key.as_bytes() {
        return Err(ControlError::Cache("basis cache key mismatch".into()));
    }
    let kind = match r.take(1)?[0] {
        0 => TraceKind::Tangential,
        1 => TraceKind::Localized,
        _ => return Err(ControlError::Cache("bad control kind".into())),
    };
    let m = r.f64s()?;
    if m.len() != 6 {
        return Err(ControlError::Cache("bad motion record".into()));
    }
    let motion = RigidMotion::new(Vec3::new(m[0], m[1], m[2]), Vec3::new(m[3], m[4], m[5]));
    let mut vecs = |len: usize| -> Result<Vec<Vec<f64>>> {
        (0..6)
            .map(|_| {
                let v = r.f64s()?;
                if v.len() != len {
                    return Err(ControlError::Cache("field length mismatch".into()));
                }
                Ok(v)
            })
            .collect()
    };
    let basic = vecs(n_dofs)?;
    let lifts = vecs(n_dofs)?;
    let tr = vecs(3 * n_nodes)?;
    let fl = vecs(3 * n_nodes)?;
    let a = r.f64s()?;
    let cond = r.f64s()?;
    if a.len() != 36 || cond.len() != 1 || r.at != bytes.len() {
        return Err(ControlError::Cache("malformed corrector record".into()));
    }
    Ok(PropulsionBasis {
        motion,
        kind,
        basic,
        tractions: tr.iter().map(|v| TraceField::from_flat(v, TraceKind::General)).collect(),
        fields: fl.iter().map(|v| TraceField::from_flat(v, kind)).collect(),
        lifts,
        a: Matrix6::from_column_slice(&a),
        cond: cond[0],
    })
}

pub fn save_basis(path: &Path, b: &PropulsionBasis, key: &str) -> Result<()> {
    Ok(write_atomic(path, &basis_to_bytes(b, key))?)
}

pub fn load_basis(path: &Path, key: &str, disc: &Discretization) -> Result<PropulsionBasis> {
    let bytes = std::fs::read(path)?;
    basis_from_bytes(&bytes, key, disc.n_dofs(), disc.surface.n_nodes())
}
