use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("basis index {index} exceeds truncation level {max_index}")]
    IndexOutOfRange { index: usize, max_index: usize },

    #[error("point {point} is outside the support of the {law} marginal")]
    OutsideSupport { point: f64, law: &'static str },

    #[error("quadrature did not converge: achieved error estimate {estimate:e}, requested {requested:e}")]
    Quadrature { estimate: f64, requested: f64 },

    #[error("kernel order {order} is too large (at most {max} supported)")]
    OrderTooLarge { order: usize, max: usize },

    #[error("kernel arity mismatch: expected {expected} points, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("naive evaluator guard: n^m = {work:e} exceeds the 1e8 oracle budget")]
    SizeGuard { work: f64 },

    #[error("kernel is not symmetric; symmetrize it first or enable auto-symmetrization")]
    AsymmetricKernel,

    #[error("coefficients are not absolutely summable; the series limit is undefined")]
    NonSummable,

    #[error("covariance factorization failed: {0}")]
    Factorization(String),

    #[error("empty sample")]
    EmptySample,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown scenario `{name}`{}", suggestion.as_ref().map(|s| format!(" (did you mean `{s}`?)")).unwrap_or_default())]
    UnknownScenario { name: String, suggestion: Option<String> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
