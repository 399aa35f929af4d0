//! Strict `key = value` run configuration.
//!
//! Lines hold one `key = value` pair; `#` starts a comment. Vectors are
//! three numbers separated by commas or blanks. Unknown keys are rejected
//! with a nearest-key suggestion.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use selfprop_control::optimizer::StepRule;
use selfprop_core::{RigidMotion, TraceKind, Vec3};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("{path}:{line}:{column}: {msg}")]
    Parse { path: String, line: usize, column: usize, msg: String },
    #[error("{path}:{line}: unknown key '{key}'{}", suggestion.as_ref().map(|s| format!(", did you mean '{s}'?")).unwrap_or_default())]
    UnknownKey { path: String, line: usize, key: String, suggestion: Option<String> },
    #[error("invalid value for '{field}': {msg}")]
    Invalid { field: &'static str, msg: String },
}

/// Patch Γ on the body surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaSpec {
    /// Faces tagged 1 in the body file.
    Tagged,
    /// Faces whose centroid satisfies `x_axis > value` (or `<`).
    HalfSpace { axis: usize, greater: bool, value: f64 },
}

impl GammaSpec {
    fn parse(s: &str) -> Option<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t == "tagged" {
            return Some(Self::Tagged);
        }
        let axis = match t.chars().next()? {
            'x' => 0,
            'y' => 1,
            'z' => 2,
            _ => return None,
        };
        let greater = match t.chars().nth(1)? {
            '>' => true,
            '<' => false,
            _ => return None,
        };
        let value = t[2..].parse().ok()?;
        Some(Self::HalfSpace { axis, greater, value })
    }

    pub fn contains(&self, x: &Vec3) -> bool {
        match *self {
            Self::Tagged => false,
            Self::HalfSpace { axis, greater, value } => (x[axis] > value) == greater,
        }
    }

    fn text(&self) -> String {
        match *self {
            Self::Tagged => "tagged".into(),
            Self::HalfSpace { axis, greater, value } => {
                format!("{} {} {value}", ["x", "y", "z"][axis], if greater { ">" } else { "<" })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Body surface file; the unit icosphere when absent.
    pub body: Option<PathBuf>,
    pub sphere_level: u32,
    pub gamma: GammaSpec,
    pub kind: TraceKind,
    pub xi: Vec3,
    pub omega: Vec3,
    /// Bound on |ξ| and |ω|.
    pub motion_bound: f64,
    pub kappa: f64,
    pub r_far: f64,
    pub h: f64,
    /// Initial control for `state`, `linearize` and `adjoint`.
    pub control: Option<PathBuf>,
    pub tol: f64,
    pub max_iter: usize,
    pub opt_tol: f64,
    pub opt_max_iter: usize,
    pub armijo: f64,
    pub shrink: f64,
    pub max_backtracks: usize,
    pub probes: usize,
    pub step_rule: StepRule,
    pub fd_step: f64,
    pub fd_directions: usize,
    pub oracle_grid: usize,
    pub seed: u64,
    pub deterministic: bool,
    pub threads: usize,
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            body: None,
            sphere_level: 1,
            gamma: GammaSpec::HalfSpace { axis: 0, greater: true, value: 0.2 },
            kind: TraceKind::Tangential,
            xi: Vec3::new(0.05, 0.0, 0.0),
            omega: Vec3::zeros(),
            motion_bound: 0.05,
            kappa: 0.1,
            r_far: 12.0,
            h: 0.5,
            control: None,
            tol: 1e-9,
            max_iter: 50,
            opt_tol: 1e-5,
            opt_max_iter: 200,
            armijo: 1e-4,
            shrink: 0.5,
            max_backtracks: 40,
            probes: 8,
            step_rule: StepRule::BarzilaiBorwein,
            fd_step: 1e-3,
            fd_directions: 3,
            oracle_grid: 32,
            seed: 7,
            deterministic: false,
            threads: 0,
            output: PathBuf::from("selfprop-out"),
        }
    }
}

pub const KEYS: &[&str] = &[
    "body",
    "sphere_level",
    "gamma",
    "kind",
    "xi",
    "omega",
    "motion_bound",
    "kappa",
    "r_far",
    "h",
    "control",
    "tol",
    "max_iter",
    "opt_tol",
    "opt_max_iter",
    "armijo",
    "shrink",
    "max_backtracks",
    "probes",
    "step_rule",
    "fd_step",
    "fd_directions",
    "oracle_grid",
    "seed",
    "deterministic",
    "threads",
    "output",
];

/// Nearest known key by edit distance, if close enough.
pub fn suggest(key: &str) -> Option<String> {
    KEYS.iter()
        .map(|k| (strsim::damerau_levenshtein(key, k), *k))
        .filter(|(d, _)| *d <= 2)
        .min()
        .map(|(_, k)| k.to_string())
}

fn parse_vec(s: &str) -> Option<Vec3> {
    let v: Vec<f64> = s.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).map(|t| t.parse().ok()).collect::<Option<_>>()?;
    (v.len() == 3 && v.iter().all(|x| x.is_finite())).then(|| Vec3::new(v[0], v[1], v[2]))
}

fn parse_kind(s: &str) -> Option<TraceKind> {
    match s {
        "tangential" => Some(TraceKind::Tangential),
        "localized" => Some(TraceKind::Localized),
        _ => None,
    }
}

impl RunConfig {
    /// Reads and validates a config file; relative paths inside it resolve
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Parse {
            path: path.display().to_string(),
            line: 0,
            column: 0,
            msg: format!("cannot read: {e}"),
        })?;
        let mut c = Self::default();
        c.apply_text(&text, &path.display().to_string(), path.parent())?;
        c.validate()?;
        Ok(c)
    }

    /// Applies `key = value` lines on top of the current values.
    pub fn apply_text(&mut self, text: &str, origin: &str, base: Option<&Path>) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("");
            if content.trim().is_empty() {
                continue;
            }
            let Some(eq) = content.find('=') else {
                let column = content.len() - content.trim_start().len() + 1;
                return Err(ConfigError::Parse { path: origin.into(), line, column, msg: "expected 'key = value'".into() });
            };
            let key = content[..eq].trim();
            let value = content[eq + 1..].trim();
            let column = eq + 2 + (content[eq + 1..].len() - content[eq + 1..].trim_start().len());
            if key.is_empty() {
                return Err(ConfigError::Parse { path: origin.into(), line, column: 1, msg: "missing key".into() });
            }
            if !KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey { path: origin.into(), line, key: key.into(), suggestion: suggest(key) });
            }
            self.set(key, value, base).map_err(|msg| ConfigError::Parse { path: origin.into(), line, column, msg })?;
        }
        Ok(())
    }

    /// Sets one key from its text value.
    pub fn set(&mut self, key: &str, value: &str, base: Option<&Path>) -> Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
            v.parse().map_err(|_| format!("'{key}' expects a number, got '{v}'"))
        }
        let path = |v: &str| -> PathBuf {
            let p = PathBuf::from(v);
            match base {
                Some(b) if p.is_relative() && !b.as_os_str().is_empty() => b.join(p),
                _ => p,
            }
        };
        match key {
            "body" => self.body = Some(path(value)),
            "sphere_level" => self.sphere_level = num(key, value)?,
            "gamma" => self.gamma = GammaSpec::parse(value).ok_or_else(|| format!("'gamma' expects 'tagged' or '<x|y|z> <>|<> <value>', got '{value}'"))?,
            "kind" => self.kind = parse_kind(value).ok_or_else(|| format!("'kind' expects 'tangential' or 'localized', got '{value}'"))?,
            "xi" => self.xi = parse_vec(value).ok_or_else(|| format!("'xi' expects three numbers, got '{value}'"))?,
            "omega" => self.omega = parse_vec(value).ok_or_else(|| format!("'omega' expects three numbers, got '{value}'"))?,
            "motion_bound" => self.motion_bound = num(key, value)?,
            "kappa" => self.kappa = num(key, value)?,
            "r_far" => self.r_far = num(key, value)?,
            "h" => self.h = num(key, value)?,
            "control" => self.control = Some(path(value)),
            "tol" => self.tol = num(key, value)?,
            "max_iter" => self.max_iter = num(key, value)?,
            "opt_tol" => self.opt_tol = num(key, value)?,
            "opt_max_iter" => self.opt_max_iter = num(key, value)?,
            "armijo" => self.armijo = num(key, value)?,
            "shrink" => self.shrink = num(key, value)?,
            "max_backtracks" => self.max_backtracks = num(key, value)?,
            "probes" => self.probes = num(key, value)?,
            "step_rule" => {
                self.step_rule = match value {
                    "doubling" => StepRule::Doubling,
                    "bb" => StepRule::BarzilaiBorwein,
                    _ => return Err(format!("'step_rule' expects 'doubling' or 'bb', got '{value}'")),
                }
            }
            "fd_step" => self.fd_step = num(key, value)?,
            "fd_directions" => self.fd_directions = num(key, value)?,
            "oracle_grid" => self.oracle_grid = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "deterministic" => self.deterministic = value.parse().map_err(|_| format!("'deterministic' expects true or false, got '{value}'"))?,
            "threads" => self.threads = num(key, value)?,
            "output" => self.output = PathBuf::from(value),
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |field, msg: String| Err(ConfigError::Invalid { field, msg });
        let positive: [(&'static str, f64); 8] = [
            ("kappa", self.kappa),
            ("r_far", self.r_far),
            ("h", self.h),
            ("tol", self.tol),
            ("opt_tol", self.opt_tol),
            ("armijo", self.armijo),
            ("fd_step", self.fd_step),
            ("motion_bound", self.motion_bound),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return bad(field, format!("must be positive, got {v}"));
            }
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return bad("shrink", format!("must lie in (0, 1), got {}", self.shrink));
        }
        if self.max_iter == 0 {
            return bad("max_iter", "must be at least 1".into());
        }
        if self.sphere_level > 4 {
            return bad("sphere_level", format!("at most 4, got {}", self.sphere_level));
        }
        if self.oracle_grid < 8 || self.oracle_grid % 2 != 0 {
            return bad("oracle_grid", format!("must be even and at least 8, got {}", self.oracle_grid));
        }
        if self.xi.norm() > self.motion_bound {
            return bad("xi", format!("|ξ| = {} exceeds motion_bound = {}", self.xi.norm(), self.motion_bound));
        }
        if self.omega.norm() > self.motion_bound {
            return bad("omega", format!("|ω| = {} exceeds motion_bound = {}", self.omega.norm(), self.motion_bound));
        }
        for (field, p) in [("body", &self.body), ("control", &self.control)] {
            if let Some(p) = p {
                if !p.is_file() {
                    return bad(field, format!("file {} does not exist", p.display()));
                }
            }
        }
        if self.body.is_none() && self.gamma == GammaSpec::Tagged && self.kind == TraceKind::Localized {
            return bad("gamma", "the built-in sphere carries no tags; give a half-space".into());
        }
        Ok(())
    }

    pub fn motion(&self) -> RigidMotion {
        RigidMotion::new(self.xi, self.omega)
    }

    /// Effective configuration in the input format.
    pub fn to_text(&self) -> String {
        let v = |x: &Vec3| format!("{}, {}, {}", x.x, x.y, x.z);
        let mut s = String::new();
        let mut put = |k: &str, val: String| {
            let _ = writeln!(s, "{k} = {val}");
        };
        if let Some(b) = &self.body {
            put("body", b.display().to_string());
        }
        put("sphere_level", self.sphere_level.to_string());
        put("gamma", self.gamma.text());
        put("kind", self.kind.name().into());
        put("xi", v(&self.xi));
        put("omega", v(&self.omega));
        put("motion_bound", self.motion_bound.to_string());
        put("kappa", self.kappa.to_string());
        put("r_far", self.r_far.to_string());
        put("h", self.h.to_string());
        if let Some(c) = &self.control {
            put("control", c.display().to_string());
        }
        put("tol", self.tol.to_string());
        put("max_iter", self.max_iter.to_string());
        put("opt_tol", self.opt_tol.to_string());
        put("opt_max_iter", self.opt_max_iter.to_string());
        put("armijo", self.armijo.to_string());
        put("shrink", self.shrink.to_string());
        put("max_backtracks", self.max_backtracks.to_string());
        put("probes", self.probes.to_string());
        put("step_rule", if self.step_rule == StepRule::Doubling { "doubling" } else { "bb" }.into());
        put("fd_step", self.fd_step.to_string());
        put("fd_directions", self.fd_directions.to_string());
        put("oracle_grid", self.oracle_grid.to_string());
        put("seed", self.seed.to_string());
        put("deterministic", self.deterministic.to_string());
        put("threads", self.threads.to_string());
        put("output", self.output.display().to_string());
        s
    }
}
