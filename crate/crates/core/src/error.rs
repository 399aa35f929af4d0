use thiserror::Error;

/// Errors raised while building or validating geometric data.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("centroid {centroid:?} is off the origin by {offset:.3e} (tolerance {tol:.3e})")]
    Centroid {
        centroid: [f64; 3],
        offset: f64,
        tol: f64,
    },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("degenerate control patch: {0}")]
    DegenerateControl(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
