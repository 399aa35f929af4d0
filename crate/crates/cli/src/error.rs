use selfprop_control::ControlError;
use selfprop_core::CoreError;
use selfprop_fem::FemError;
use selfprop_spectral::SpectralError;
use thiserror::Error;

use crate::config::ConfigError;

/// Process exit codes.
pub mod code {
    pub const OTHER: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const IO: i32 = 3;
    pub const GEOMETRY: i32 = 4;
    pub const NON_CONTRACTION: i32 = 5;
    pub const MAX_ITERATIONS: i32 = 6;
    pub const SINGULAR: i32 = 7;
    pub const OPTIMIZER: i32 = 8;
    pub const VERIFY: i32 = 9;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{0}")]
    Geometry(String),
    #[error("{0}")]
    NonContraction(String),
    #[error("{0}")]
    MaxIterations(String),
    #[error("{0}")]
    Singular(String),
    #[error("optimizer failed: {0}")]
    Optimizer(String),
    #[error("{0} verification check(s) failed")]
    VerifyFailed(usize),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            Self::Config(_) => code::CONFIG,
            Self::Io(_) => code::IO,
            Self::Geometry(_) => code::GEOMETRY,
            Self::NonContraction(_) => code::NON_CONTRACTION,
            Self::MaxIterations(_) => code::MAX_ITERATIONS,
            Self::Singular(_) => code::SINGULAR,
            Self::Optimizer(_) => code::OPTIMIZER,
            Self::VerifyFailed(_) => code::VERIFY,
            Self::Other(_) => code::OTHER,
        }
    }

    /// Stable machine-readable name of the error class.
    pub fn class(&self) -> &'static str {
        match self {
            Self::Config(_) => "config",
            Self::Io(_) => "io",
            Self::Geometry(_) => "geometry",
            Self::NonContraction(_) => "non-contraction",
            Self::MaxIterations(_) => "max-iterations",
            Self::Singular(_) => "singular-corrector",
            Self::Optimizer(_) => "optimizer",
            Self::VerifyFailed(_) => "verify",
            Self::Other(_) => "other",
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Io(e) => Self::Io(e.to_string()),
            CoreError::Numerical(m) => Self::Other(m),
            other => Self::Geometry(other.to_string()),
        }
    }
}

impl From<FemError> for CliError {
    fn from(e: FemError) -> Self {
        match e {
            FemError::Geometry { .. } => Self::Geometry(e.to_string()),
            FemError::Cache(_) | FemError::Io(_) => Self::Io(e.to_string()),
            FemError::Core(c) => c.into(),
            FemError::Numerical { .. } => Self::Other(e.to_string()),
        }
    }
}

impl From<ControlError> for CliError {
    fn from(e: ControlError) -> Self {
        match e {
            ControlError::SingularCorrector { .. } => Self::Singular(e.to_string()),
            ControlError::NonContraction { .. } => Self::NonContraction(e.to_string()),
            ControlError::MaxIterations { .. } => Self::MaxIterations(e.to_string()),
            ControlError::LineSearch(_) => Self::Optimizer(e.to_string()),
            ControlError::Invalid(m) => Self::Other(m),
            ControlError::Cache(_) | ControlError::Io(_) => Self::Io(e.to_string()),
            ControlError::Fem(f) => f.into(),
            ControlError::Core(c) => c.into(),
        }
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        Self::Other(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
