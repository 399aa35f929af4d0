//! Artifact formats: control traces, CSV tables and JSON summaries, all
//! written atomically.

use std::path::Path;

use selfprop_core::{SurfaceSpace, TraceField, TraceKind, Vec3};
use selfprop_fem::io::write_atomic;

use crate::error::{CliError, Result};

const TRACE_HEADER: &str = "selfprop-trace 1";

/// Text form of a boundary trace: header, kind, node count, one `vx vy vz`
/// line per surface node.
pub fn trace_to_string(t: &TraceField) -> String {
    let mut s = format!("{TRACE_HEADER}\nkind {}\nnodes {}\n", t.kind.name(), t.len());
    for v in &t.values {
        s.push_str(&format!("{:e} {:e} {:e}\n", v.x, v.y, v.z));
    }
    s
}

pub fn parse_trace(text: &str) -> Result<TraceField> {
    let bad = |line: usize, msg: &str| CliError::Io(format!("trace line {line}: {msg}"));
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let mut next = |what: &str| lines.next().ok_or_else(|| CliError::Io(format!("trace ended before {what}")));
    let (ln, h) = next("header")?;
    if h != TRACE_HEADER {
        return Err(bad(ln, "expected 'selfprop-trace 1'"));
    }
    let (ln, k) = next("kind")?;
    let kind = match k.strip_prefix("kind ").map(str::trim) {
        Some("tangential") => TraceKind::Tangential,
        Some("localized") => TraceKind::Localized,
        Some("general") => TraceKind::General,
        _ => return Err(bad(ln, "expected 'kind tangential|localized|general'")),
    };
    let (ln, n) = next("node count")?;
    let n: usize = n.strip_prefix("nodes ").and_then(|s| s.trim().parse().ok()).ok_or_else(|| bad(ln, "expected 'nodes <count>'"))?;
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let (ln, l) = next("all node values")?;
        let c: Vec<f64> = l.split_whitespace().map(|t| t.parse().ok()).collect::<Option<_>>().ok_or_else(|| bad(ln, "values must be numbers"))?;
        if c.len() != 3 || c.iter().any(|x| !x.is_finite()) {
            return Err(bad(ln, "expected three finite numbers"));
        }
        values.push(Vec3::new(c[0], c[1], c[2]));
    }
    if let Some((ln, _)) = lines.next() {
        return Err(bad(ln, "unexpected trailing content"));
    }
    Ok(TraceField::new(values, kind))
}

/// Reads a control trace and checks it against the surface and the kind.
pub fn read_control(path: &Path, s: &SurfaceSpace, kind: TraceKind) -> Result<TraceField> {
    let t = parse_trace(&std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?)?;
    if t.len() != s.n_nodes() {
        return Err(CliError::Io(format!("{}: trace has {} nodes, the surface has {}", path.display(), t.len(), s.n_nodes())));
    }
    if t.kind != kind {
        return Err(CliError::Other(format!("{}: trace is {}, the run expects {}", path.display(), t.kind.name(), kind.name())));
    }
    t.check(s)?;
    Ok(t)
}

pub fn write_trace(path: &Path, t: &TraceField) -> Result<()> {
    Ok(write_atomic(path, trace_to_string(t).as_bytes())?)
}

/// CSV table built in memory and written in one atomic step.
pub struct Table {
    w: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Result<Self> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        Ok(Self { w })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        Ok(self.w.write_record(fields)?)
    }

    pub fn bytes(self) -> Result<Vec<u8>> {
        self.w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn save(self, path: &Path) -> Result<()> {
        Ok(write_atomic(path, &self.bytes()?)?)
    }
}

/// Full-precision float text (round-trips exactly).
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn save_json(path: &Path, v: &serde_json::Value) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(write_atomic(path, s.as_bytes())?)
}

pub fn vec_json(v: &Vec3) -> serde_json::Value {
    serde_json::json!([v.x, v.y, v.z])
}
