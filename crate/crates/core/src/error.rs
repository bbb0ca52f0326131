use thiserror::Error;

/// Errors raised by the library. Indices in messages are 1-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric (residual {residual:e} exceeds {tolerance:e})")]
    NotSymmetric { residual: f64, tolerance: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("sector violation at index {index}: {detail}")]
    SectorViolation { index: usize, detail: String },

    #[error("momentum p_{index} = {value} is not positive")]
    NonPositiveMomentum { index: usize, value: f64 },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("orientation mismatch: {0}")]
    OrientationMismatch(String),

    #[error("near-singular: {0}")]
    NearSingular(String),

    #[error("order k = {k} out of range 1..={n}")]
    OrderOutOfRange { k: usize, n: usize },

    #[error("invalid index set {0:?}")]
    InvalidIndexSet(Vec<usize>),

    #[error("compound of order {k} for n = {n} exceeds the size guard")]
    TooLarge { n: usize, k: usize },

    #[error("eigendecomposition did not converge after {sweeps} sweeps (off-diagonal {off:e})")]
    NoConvergence { sweeps: usize, off: f64 },

    #[error("eigenvector {index} has vanishing first component ({value:e})")]
    ZeroFirstComponent { index: usize, value: f64 },

    #[error("eigenvalues {index} and {} are not numerically simple (gap {gap:e})", index + 1)]
    DegenerateSpectrum { index: usize, gap: f64 },

    #[error("rank deficient: pivot {index} is {value:e}")]
    RankDeficient { index: usize, value: f64 },

    #[error("overflow guard: |dt| * lambda_max = {0} exceeds 50")]
    OverflowGuard(f64),

    #[error("collision at t = {t}: q_{i} and q_{j} within {gap:e}")]
    Collision { t: f64, i: usize, j: usize, gap: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("off-diagonal ratio {ratio} at ({i}, {j}) is not below 1; matrix left the Lax image")]
    NoRealGap { i: usize, j: usize, ratio: f64 },

    #[error("too few samples: {0}")]
    TooFewSamples(String),

    #[error("sector mismatch: {0}")]
    SectorMismatch(String),

    #[error("time {t} outside trajectory range [{start}, {end}]")]
    TimeOutOfRange { t: f64, start: f64, end: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
