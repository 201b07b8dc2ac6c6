use thiserror::Error;

/// Errors raised by the discretization and study routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported quadrature size {0} (expected 1..={max})", max = crate::quadrature::MAX_POINTS)]
    QuadratureSize(usize),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("velocity must be positive, got {0}")]
    VelocitySign(f64),
    #[error("time step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("time step {dt} exceeds CFL bound {bound}")]
    Cfl { dt: f64, bound: f64 },
    #[error("functions live on different meshes or degrees")]
    MeshMismatch,
    #[error("nodal table has shape {got:?}, expected {expected:?}")]
    ShapeMismatch {
        got: (usize, usize),
        expected: (usize, usize),
    },
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("time {0} outside the oracle's validity range")]
    TimeOutOfRange(f64),
    #[error("initial data violates the obstacle at x = {x}: u0 = {u0}, g = {g}")]
    Incompatible { x: f64, u0: f64, g: f64 },
    #[error("least-squares fit needs at least two rows with positive errors: {0}")]
    InvalidFit(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
