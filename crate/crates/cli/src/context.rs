//! Body, mesh and corrector basis for a run, with content-keyed caches.

use std::path::{Path, PathBuf};

use selfprop_control::basis::{cache_key, load_basis, save_basis};
use selfprop_control::{PropulsionBasis, Problem};
use selfprop_core::{BodyGeometry, Surface, TraceField};
use selfprop_fem::io::{load_mesh, save_mesh};
use selfprop_fem::{build_mesh, Discretization};
use sha2::{Digest, Sha256};

use crate::config::{ConfigError, GammaSpec, RunConfig};
use crate::error::Result;
use crate::output::read_control;

/// Surface of the configured body with Γ marked.
pub fn body_surface(cfg: &RunConfig) -> Result<Surface> {
    let s = match &cfg.body {
        Some(p) => Surface::read(p)?,
        None => Surface::icosphere(cfg.sphere_level, 1.0),
    };
    Ok(match cfg.gamma {
        GammaSpec::Tagged => s,
        g => s.with_gamma(|x| g.contains(x)),
    })
}

/// Cache key of the exterior mesh: body surface with Γ, R∞ and h.
pub fn mesh_key(surface: &Surface, r_far: f64, h: f64) -> String {
    let mut d = Sha256::new();
    d.update(b"selfprop-mesh 1\n");
    d.update(surface.to_ascii().as_bytes());
    d.update(r_far.to_le_bytes());
    d.update(h.to_le_bytes());
    hex::encode(d.finalize())
}

pub struct Context {
    pub cfg: RunConfig,
    pub disc: Discretization,
    pub mesh_key: String,
    pub mesh_path: PathBuf,
    /// Whether the mesh came from the cache.
    pub mesh_cached: bool,
}

pub fn cache_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output.join("cache")
}

impl Context {
    /// Loads the mesh from the cache or builds and caches it. A cache entry
    /// that fails to load is rebuilt.
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let surface = body_surface(cfg)?;
        let key = mesh_key(&surface, cfg.r_far, cfg.h);
        let dir = cache_dir(cfg);
        std::fs::create_dir_all(&dir)?;
        let path = dir.join(format!("mesh-{}.bin", &key[..16]));
        let mut cached = false;
        let ext = match path.is_file().then(|| load_mesh(&path)) {
            Some(Ok(m)) => {
                cached = true;
                m
            }
            other => {
                if let Some(Err(e)) = other {
                    log::warn!("discarding mesh cache {}: {e}", path.display());
                }
                let m = build_mesh(&BodyGeometry::new(surface)?, cfg.r_far, cfg.h)?;
                save_mesh(&path, &m)?;
                m
            }
        };
        Ok(Self { cfg: cfg.clone(), disc: Discretization::from_mesh(ext), mesh_key: key, mesh_path: path, mesh_cached: cached })
    }

    pub fn basis_path(&self, key: &str) -> PathBuf {
        cache_dir(&self.cfg).join(format!("basis-{}.bin", &key[..16]))
    }

    /// Factors the operator and loads or builds the corrector basis.
    pub fn problem(&self) -> Result<(Problem<'_>, bool)> {
        let motion = self.cfg.motion();
        let solver = self.disc.factor(&motion)?;
        let key = cache_key(&self.disc, &motion, self.cfg.kind);
        let path = self.basis_path(&key);
        let (basis, cached) = match path.is_file().then(|| load_basis(&path, &key, &self.disc)) {
            Some(Ok(b)) => (b, true),
            other => {
                if let Some(Err(e)) = other {
                    log::warn!("discarding basis cache {}: {e}", path.display());
                }
                let b = PropulsionBasis::new(&self.disc, &solver, self.cfg.kind)?;
                save_basis(&path, &b, &key)?;
                (b, false)
            }
        };
        let mut p = Problem::from_parts(&self.disc, solver, basis)?;
        p.opts.tol = self.cfg.tol;
        p.opts.max_iter = self.cfg.max_iter;
        Ok((p, cached))
    }

    /// Configured control, or zero.
    pub fn control(&self) -> Result<TraceField> {
        let Some(p) = &self.cfg.control else {
            return Ok(TraceField::zeros(self.disc.surface.n_nodes(), self.cfg.kind));
        };
        let v = read_control(p, &self.disc.surface, self.cfg.kind)?;
        let n = self.disc.surface.surrogate().norm(&v.values);
        if n > self.cfg.kappa * (1.0 + 1e-9) {
            return Err(ConfigError::Invalid { field: "kappa", msg: format!("control {} has norm {n:.6e} outside the admissible ball κ = {}", p.display(), self.cfg.kappa) }.into());
        }
        Ok(v)
    }

    pub fn out(&self, name: &str) -> PathBuf {
        self.cfg.output.join(name)
    }
}

pub fn ensure_dir(p: &Path) -> Result<()> {
    Ok(std::fs::create_dir_all(p)?)
}
