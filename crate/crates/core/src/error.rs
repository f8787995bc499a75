use thiserror::Error;

use crate::expr::{EvalError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("quadrature on [{a}, {b}] did not converge before the panel cap")]
    QuadratureNoConvergence { a: f64, b: f64 },

    #[error("singular or ill-conditioned Jacobian (|det| = {det:e}, scale = {scale:e})")]
    SingularJacobian { det: f64, scale: f64 },

    #[error(
        "zero at {point:?} is not isolated: Jacobian reciprocal condition {rcond:e}; \
         reduce the symmetry (e.g. pass to amplitude coordinates) before certifying"
    )]
    NonIsolatedZero { point: Vec<f64>, rcond: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("dimension {n} exceeds the supported maximum {cap}")]
    DimensionCap { n: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("QR iteration failed to converge")]
    EigenNoConvergence,

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("maximum number of steps reached at t = {t}")]
    MaxSteps { t: f64 },

    #[error("switching chatter: {events} events before t = {t} (sliding motion is not supported)")]
    Chatter { events: usize, t: f64 },

    #[error("{count} switching roots in one period exceeds the limit of {limit}")]
    TooManySwitchingRoots { count: usize, limit: usize },

    #[error("unperturbed flow is not T-periodic: |exp(AT) - I| = {deviation:e}")]
    NotPeriodic { deviation: f64 },

    #[error("precondition rejected: {0}")]
    PreconditionRejected(String),

    #[error("Poincare iterate {iteration} left the certified set at {point:?}")]
    IterateLeftSet { iteration: usize, point: Vec<f64> },

    #[error("no certified radius down to {radius:e}")]
    NoCertifiedRadius { radius: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Input problems (bad config, bad expressions, IO) as opposed to
    /// failures of a numerical stage.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse(_) | Error::Config(_) | Error::InvalidInput(_) | Error::Io(_) | Error::Json(_)
        )
    }
}
