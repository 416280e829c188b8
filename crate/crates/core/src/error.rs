use thiserror::Error;

/// Errors raised by the simulator library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("operator dimension {0} exceeds the 10^4 limit")]
    DimensionOverflow(usize),

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("unknown level label `{0}`")]
    UnknownLevel(String),

    #[error("operator is not Hermitian (max |A - A^dag| = {0:e})")]
    NotHermitian(f64),

    #[error("density matrix trace {0} is not 1")]
    TraceNotUnit(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("antiblockade condition has no positive root for V = {v}, Omega = {omega}")]
    NoPositiveRoot { v: f64, omega: f64 },

    #[error("Forster defect is zero: dipole-dipole coupling dominates at every distance")]
    ZeroDefect,

    #[error("detuning sensitivity is singular at this operating point")]
    SingularSensitivity,

    #[error("interaction block is degenerate (no dipole-dipole splitting)")]
    DegenerateBlock,

    #[error("no decay rate supplied for Rydberg level `{0}`")]
    MissingRate(String),

    #[error("time step {dt:e} us exceeds the stability bound {max:e} us")]
    StepTooLarge { dt: f64, max: f64 },

    #[error("numerical invariant violated at t = {t} us: {what}")]
    Physicality { t: f64, what: String },

    #[error("steady state is not unique ({0} near-zero singular values)")]
    DegenerateSteadyState(usize),

    #[error("steady state did not converge: {0}")]
    NotConverged(String),

    #[error("power-law fit is degenerate: {0}")]
    DegenerateFit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
