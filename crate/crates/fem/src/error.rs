use thiserror::Error;

#[derive(Debug, Error)]
pub enum FemError {
    #[error("geometry error: {msg} (offending cells: {cells:?})")]
    Geometry { msg: String, cells: Vec<usize> },
    #[error("numerical error: {msg}; residual history {history:?}")]
    Numerical { msg: String, history: Vec<f64> },
    #[error("cache error: {0}")]
    Cache(String),
    #[error(transparent)]
    Core(#[from] selfprop_core::CoreError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl FemError {
    pub fn geometry(msg: impl Into<String>) -> Self {
        FemError::Geometry { msg: msg.into(), cells: Vec::new() }
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        FemError::Numerical { msg: msg.into(), history: Vec::new() }
    }
}

pub type Result<T> = std::result::Result<T, FemError>;
