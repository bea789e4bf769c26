use thiserror::Error;

/// Errors raised by the coefficient pipeline and the kinetic simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numeric domain error: {0}")]
    NumericDomain(String),

    /// The density lies at or below the critical density, so no nematic root exists.
    #[error("no nematic branch at rho = {rho} (critical density rho* = {rho_star})")]
    NoNematicBranch { rho: f64, rho_star: f64 },

    #[error("iteration limit reached in {context}: bracket [{lo}, {hi}]")]
    IterationLimit { context: String, lo: f64, hi: f64 },

    #[error("insufficient resolution: relative residual {residual:e} exceeds {tolerance:e}")]
    ResolutionInsufficient { residual: f64, tolerance: f64 },

    #[error("Lambda = 0: the mobility constant degenerates, use constant_c_lambda0")]
    LambdaZero,

    #[error("degenerate moments: the Q-tensor vanishes")]
    DegenerateMoment,

    #[error("positivity violated: min f = {min:e}")]
    Positivity { min: f64 },

    #[error("ambiguous kernel: singular values {singular_values:?}")]
    AmbiguousKernel { singular_values: Vec<f64> },

    #[error("singular coefficient: {0}")]
    SingularCoefficient(String),

    #[error("integrator failure at t = {t}: {reason}")]
    Integrator { t: f64, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::NumericDomain(msg.into())
}
