//! Discontinuous Galerkin solvers for the obstacle transport equation
//!
//! ```text
//! min(u_t + c u_x, u - g(x)) = 0
//! ```
//!
//! on periodic domains. Two transport solvers are provided: a
//! semi-Lagrangian step (exact L2 projection of the shifted solution) and an
//! upwind RKDG step with TVD-RK3 time stepping. The obstacle is imposed by
//! taking the maximum with `g~` at the Gauss nodes of each cell. A tensor
//! product RKDG solver covers the 2-D case.
//!
//! All numerics are generic over [`Real`]; the `f64` aliases below are what
//! the study runner and CLI use.

pub mod dg;
pub mod error;
pub mod exact;
pub mod metrics;
pub mod obstacle;
pub mod projection;
pub mod quadrature;
pub mod rkdg;
pub mod scalar;
pub mod schedule;
pub mod sldg;
pub mod solver2d;
pub mod study;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Mesh1D = dg::Mesh1D<f64>;
pub type DgFunction = dg::DgFunction<f64>;
pub type QuadRule = quadrature::QuadRule<f64>;
pub type ObstacleSpec = obstacle::ObstacleSpec<f64>;
pub type RkdgSolver = rkdg::RkdgSolver<f64>;
pub type Transport = obstacle::Transport<f64>;
pub type DppOracle = exact::DppOracle<f64>;
pub type Mesh2D = solver2d::Mesh2D<f64>;
pub type DgFunction2D = solver2d::DgFunction2D<f64>;
pub type Rkdg2D = solver2d::Rkdg2D<f64>;
pub type Obstacle2D = solver2d::Obstacle2D<f64>;
