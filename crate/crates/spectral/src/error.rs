use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("time quadrature did not converge at ζ = {zeta:?}: estimated error {estimate:.3e} > {tol:.3e}")]
    Quadrature { zeta: [f64; 3], estimate: f64, tol: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("|ω| = {0:.3e} is below the rotation threshold; use the non-rotating formula")]
    OmegaBelowThreshold(f64),
}

pub type Result<T> = std::result::Result<T, SpectralError>;
