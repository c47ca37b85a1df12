use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("region is unbounded")]
    UnboundedRegion,
    #[error("grid mask is empty (spacing {h} too coarse for the domain)")]
    EmptyMask { h: f64 },
    #[error("support mask and domain mask do not intersect")]
    EmptyIntersection,
    #[error("quadrature did not converge: estimate {value} with error {error_estimate} after {cells} cells")]
    QuadratureNonConvergence {
        value: f64,
        error_estimate: f64,
        cells: usize,
    },
    #[error("quadrature diverges: successive refinements grow without bound ({value})")]
    QuadratureDivergence { value: f64 },
    #[error("{solver} did not converge: residual {residual:e} after {iterations} iterations")]
    SolverNonConvergence {
        solver: &'static str,
        residual: f64,
        iterations: usize,
    },
    #[error("dense eigensolve limited to {limit} unknowns, got {dofs}")]
    SizeLimit { dofs: usize, limit: usize },
    #[error("form {index} of the probe family is identically zero")]
    ZeroForm { index: usize },
    #[error("weight Hessian is not Hermitian at node {node} (defect {defect:e})")]
    NonHermitianHessian { node: usize, defect: f64 },
    #[error("alpha search failed for j = {j} after {halvings} halvings")]
    AlphaSearchFailed { j: u32, halvings: u64 },
    #[error("certificate for j = {j} no longer satisfies the alpha inequality (margin {margin:.4})")]
    StaleCertificate { j: u32, margin: f64 },
    #[error("operator is not separable over the product grid: {0}")]
    NotSeparable(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
