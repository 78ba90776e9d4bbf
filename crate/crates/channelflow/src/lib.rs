//! Pseudo-spectral channel solvers with inflow/outflow boundary conditions,
//! an explicit boundary-layer corrector, and the diagnostics needed to
//! measure the viscous-to-inviscid convergence rate.

pub mod compat;
pub mod corrector;
pub mod diagnostics;
pub mod error;
pub mod euler;
pub mod forcing;
pub mod fields;
pub mod grid;
pub mod harness;
pub mod linalg;
pub mod mms;
pub mod ns;
pub mod poisson;
pub mod smooth;
pub mod transport;

pub use error::{ChannelError, Result};
pub use fields::{BoundaryTrace, ScalarField, VectorField};
pub use grid::{BackgroundFlow, ChannelGeometry, ChannelGrid, Wall};
