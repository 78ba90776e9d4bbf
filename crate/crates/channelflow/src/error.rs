use thiserror::Error;

/// Errors shared across the solver, corrector, and diagnostics modules.
#[derive(Error, Debug, Clone)]
pub enum ChannelError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("advective CFL violated: cfl = {cfl:.3}, suggested dt = {suggested_dt:.3e}")]
    CflViolation { cfl: f64, suggested_dt: f64 },

    #[error(
        "incompatible Neumann data: defect {defect:.3e} exceeds tolerance {tol:.3e} (scale {scale:.3e})"
    )]
    IncompatibleNeumann { defect: f64, tol: f64, scale: f64 },

    #[error(
        "wall-normal mesh does not resolve the boundary layer: smallest cell {actual:.3e} > required {required:.3e}"
    )]
    UnderResolvedLayer { required: f64, actual: f64 },

    #[error("snapshot times are not uniformly spaced: {0}")]
    NonUniformSnapshots(String),

    #[error("snapshot times of the two runs are misaligned at index {index}: {t_ns} vs {t_euler}")]
    MisalignedSnapshots { index: usize, t_ns: f64, t_euler: f64 },

    #[error("{0}")]
    InsufficientData(String),

    #[error("inconsistent diagnostic input: {0}")]
    Inconsistent(String),

    #[error("linear solve failed: {0}")]
    SingularSystem(String),
}

pub type Result<T> = std::result::Result<T, ChannelError>;
