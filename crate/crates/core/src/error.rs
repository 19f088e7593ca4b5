use thiserror::Error;

/// Errors produced while building, filtering or serializing a curve.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("size error: {0}")]
    Size(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("integrand is not periodic: mean coefficient {mean:e} exceeds tolerance {tol:e}")]
    NonPeriodicIntegrand { mean: f64, tol: f64 },
    #[error("singular parametrization: {0}")]
    SingularParametrization(String),
    #[error("curve does not close: residual {0:e}")]
    NotClosed(f64),
    #[error("degenerate direction while closing the curve: {0}")]
    DegenerateDirection(String),
    #[error("repositioning failed: {0}")]
    Reposition(String),
    #[error("ill-conditioned perturbation system: {0}")]
    IllConditionedPerturbation(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
