use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("unsupported dimension {0} (supported: 1 to 3)")]
    UnsupportedDim(usize),
    #[error("singular affine map (det = {0:e})")]
    SingularMap(f64),
    #[error("halfspace system describes an unbounded set")]
    Unbounded,
    #[error("point lies outside the domain")]
    OutsideDomain,
    #[error("domain is not full-dimensional")]
    DegenerateDomain,
    #[error("not convex: {0}")]
    NotConvex(String),
    #[error("domains do not intersect")]
    EmptyDomain,
    #[error("J must be a nondegenerate segment")]
    BadSegment,
    #[error("Hessian is singular")]
    SingularHessian,
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("function is not finite-valued")]
    NotFiniteValued,
    #[error("not in Conc (witness t = {t}): {reason}")]
    NotConc { t: f64, reason: String },
    #[error("evaluation failed: {0}")]
    EvalError(String),
    #[error("bad transform: {0}")]
    BadTransform(String),
    #[error("not a valuation: {0}")]
    NotAValuation(String),
    #[error("not representable: {0}")]
    NotRepresentable(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
