use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("quaternion norm {norm:e} is too small to normalize")]
    DegenerateQuaternion { norm: f64 },

    #[error("expected {expected} values at grid nodes, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("grid is exact up to two_l = {available}, but {required} is required")]
    InsufficientExactness { required: u32, available: u32 },

    #[error("band exhausted: {0}")]
    BandExhausted(String),

    #[error("band limits differ: {0} vs {1}")]
    BandMismatch(u32, u32),

    #[error("symbols live on different grids")]
    GridMismatch,

    #[error("Taylor biorthogonality system is singular at order {order}")]
    SingularTaylorSystem { order: u32 },

    #[error("operator failed the linearity spot check (deviation {deviation:e})")]
    Nonlinear { deviation: f64 },

    #[error("symbol depends on x but was requested as x-invariant (spread {spread:e})")]
    NotInvariant { spread: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
