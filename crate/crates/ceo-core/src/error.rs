use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },
    #[error("median decoding needs an odd number of agents (L = 2m+1), got L = {0}")]
    EvenAgentCount(usize),
    #[error("Fisher information undefined: the observation model is non-regular")]
    FisherUndefined,
    #[error("certificate unavailable for this model/channel pair ({0}); supply constants")]
    CertificateUnavailable(&'static str),
    #[error("test channel has unbounded conditional mutual information I(Y;U|X)")]
    UnboundedRate,
    #[error("quadrature residual {residual:e} exceeds tolerance {tolerance:e} (value {value})")]
    QuadratureNonConvergence { value: f64, residual: f64, tolerance: f64 },
    #[error("estimator precondition violated: {0}")]
    EstimatorPrecondition(&'static str),
    #[error("argument {value} outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("slope fit needs distinct abscissae")]
    DegenerateAbscissae,
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("finite difference left the support at x = {0}")]
    SupportCollapse(f64),
    #[error("model and channel cannot be composed: {0}")]
    NotComposable(&'static str),
    #[error("wrong regularity class: {0}")]
    RegularityMismatch(&'static str),
}
