use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite integrand value {value} at node w = {node}")]
    NonFinite { node: f64, value: f64 },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("steady state is not unique: {zero_modes} eigenvalues near zero")]
    Degenerate { zero_modes: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("unsupported regime: {0}")]
    Unsupported(String),

    #[error("fit failed: {0}")]
    Fit(String),
}
