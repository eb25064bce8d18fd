use alloc::vec::Vec;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("star graph needs at least one incoming and one outgoing edge (got n={n_in}, m={m_out})")]
    InvalidGraph { n_in: usize, m_out: usize },

    #[error("grid needs a positive finite length and at least 2 cells (got L={length}, N={cells})")]
    InvalidGrid { length: f64, cells: usize },

    #[error("fields live on different graphs or grids")]
    Incompatible,

    #[error("expected {expected} samples, got {got}")]
    SampleCount { expected: usize, got: usize },

    #[error("non-finite sample in field")]
    NonFinite,

    #[error("L^p exponent must be >= 1 (got {p})")]
    InvalidExponent { p: f64 },

    #[error("tail radius must satisfy 0 < R < L (got R={radius}, L={length})")]
    TailRadius { radius: f64, length: f64 },

    #[error("time must be positive (got {t})")]
    NonPositiveTime { t: f64 },

    #[error("power-law exponent must exceed 1 (got q={q})")]
    InvalidPower { q: f64 },

    #[error("truncation bounds must satisfy lower <= 0 <= upper (got [{lower}, {upper}])")]
    InvalidTruncation { lower: f64, upper: f64 },

    #[error("implicit weight must be 1/2 or 1 (got {weight})")]
    InvalidWeight { weight: f64 },

    #[error("kernel tail outside [0, L] estimated at {estimate:e}, above tolerance {tolerance:e}")]
    KernelTail { estimate: f64, tolerance: f64 },

    #[error("junction Schur complement is singular ({value})")]
    SingularSchur { value: f64 },

    #[error("time step {dt:e} violates CFL; admissible step is {admissible:e}")]
    CflViolation { dt: f64, admissible: f64 },

    #[error("Picard slab {dt:e} with Lipschitz constant {lipschitz} breaks dt*L^2 < 1/4; admissible slab is {admissible:e}")]
    PicardPrecondition { dt: f64, lipschitz: f64, admissible: f64 },

    #[error("Picard iteration is not contracting (residuals {residuals:?})")]
    NonContraction { residuals: Vec<f64> },

    #[error("solution diverged at t={time} (sup norm {sup:e})")]
    Diverged { time: f64, sup: f64 },

    #[error("invalid sample times: {0}")]
    SampleTimes(&'static str),

    #[error("need at least {needed} snapshots, got {got}")]
    TooFewSnapshots { needed: usize, got: usize },

    #[error("decay fit needs at least 4 points in the window, got {got}")]
    SparseWindow { got: usize },

    #[error("decay fit needs positive norms")]
    NonPositiveNorm,

    #[error("scale factor {lambda} out of range")]
    ScaleOutOfRange { lambda: f64 },

    #[error("invalid configuration: {0}")]
    Config(&'static str),
}
