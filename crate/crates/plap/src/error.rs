use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("gradient of log-density undefined at {x:?}: {reason}")]
    Singular { x: Vec<f64>, reason: &'static str },
    #[error("exponent p = {0} must be an even integer >= 2")]
    Exponent(u32),
    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexRange { vertex: usize, n: usize },
    #[error("component {component} ({size} vertices, containing vertex {vertex}) has no labeled vertex")]
    UnlabeledComponent {
        component: usize,
        vertex: usize,
        size: usize,
    },
    #[error("quadrature did not converge: estimated error {estimate:e} > tolerance {tol:e}")]
    Quadrature { estimate: f64, tol: f64 },
    #[error("no root bracketed in [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },
    #[error("linear system is singular or ill-conditioned")]
    SingularSystem,
    #[error("invalid config: {field}: {reason}")]
    Config { field: String, reason: String },
    #[error("empty series")]
    EmptySeries,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
