use thiserror::Error;

#[derive(Debug, Error)]
pub enum ControlError {
    #[error("corrector matrix is singular (condition number {cond:.3e}); try smaller (ξ, ω) or a finer mesh")]
    SingularCorrector { cond: f64 },
    #[error("{what} is not contracting (ratios {ratios:?}); the data are too large for the fixed point, reduce the control or the rigid motion")]
    NonContraction { what: &'static str, ratios: Vec<f64> },
    #[error("{what} did not converge in {iterations} iterations (last increment {last:.3e})")]
    MaxIterations { what: &'static str, iterations: usize, last: f64 },
    #[error("line search failed after {0} backtracks")]
    LineSearch(usize),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("cache error: {0}")]
    Cache(String),
    #[error(transparent)]
    Fem(#[from] selfprop_fem::FemError),
    #[error(transparent)]
    Core(#[from] selfprop_core::CoreError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ControlError>;
