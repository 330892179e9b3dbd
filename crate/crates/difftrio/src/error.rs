use thiserror::Error;

/// Errors produced anywhere in the solver suite.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("time {t} outside the signal span [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("integration failure at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("step size underflow at t = {t}; the problem appears too stiff for this integrator")]
    StepUnderflow { t: f64 },

    #[error("Newton iteration failed to converge at t = {t}")]
    StiffSolve { t: f64 },

    #[error("constitutive coefficient out of range: {0}")]
    ConstitutiveRange(String),

    #[error("explicit step {dt} exceeds the stability bound {bound}")]
    CflViolation { dt: f64, bound: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}:{row}: {reason}")]
    Ingestion {
        path: String,
        row: usize,
        reason: String,
    },

    #[error("reference refused: cross-method error {eps:.3e} exceeds the certification gate {gate:.3e}")]
    OracleDivergence { eps: f64, gate: f64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("scd undefined: reference field vanishes at a final-time node")]
    UndefinedScd,

    #[error("location {x} is not a node of the solver grid")]
    OffGrid { x: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
