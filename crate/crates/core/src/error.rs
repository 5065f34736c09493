use thiserror::Error;

/// Errors raised by the library.
///
/// Every variant carries enough numeric context for a caller (or the CLI) to
/// print a useful diagnostic without recomputing anything.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not symmetric: largest asymmetry {max_asymmetry:e}")]
    NotSymmetric { max_asymmetry: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("unphysical covariance matrix: sigma + i*Omega has eigenvalue {min_eigenvalue:e} < 0")]
    UnphysicalState { min_eigenvalue: f64 },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("singular symplectic parametrization (u = {u}, v = {v}, w = {w})")]
    SingularParams { u: f64, v: f64, w: f64 },

    #[error("matrix {s:?} is not symplectic: det = {det}")]
    NotSymplectic { s: [[f64; 2]; 2], det: f64 },

    #[error("conditioning block is singular: det = {det:e}")]
    SingularBlock { det: f64 },

    #[error("marginal variance of the conditioning party is not positive: {variance:e}")]
    SingularMarginal { variance: f64 },

    #[error("invalid standard form (a = {a}, b = {b}, c1 = {c1}, c2 = {c2}): {reason}")]
    InvalidStandardForm {
        a: f64,
        b: f64,
        c1: f64,
        c2: f64,
        reason: &'static str,
    },

    #[error(
        "minimization did not converge: best value {best_value:e}, closed-form minimum {target:e}"
    )]
    NoConvergence { best_value: f64, target: f64 },

    #[error("outcomes of the conditioning party have zero variance")]
    DegenerateVariance,

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("mixture is not a valid probability mixture: {0}")]
    InvalidMixture(String),

    #[error("mixture covariance matrix is unphysical: {0}")]
    UnphysicalMixture(Box<Error>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed input: {0}")]
    Schema(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
