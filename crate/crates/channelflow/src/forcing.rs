//! Time-dependent forcing providers.
//!
//! The homogenized systems carry the reduced forcing
//! `f - dU/dt - U . grad U` (plus `nu Laplacian U` on the viscous side).
//! For the constant background flow used here every background-derived term
//! vanishes, so the provider reduces to `f` itself; the indirection keeps the
//! solver faithful to the full right-hand side.

use std::sync::Arc;

use crate::fields::VectorField;
use crate::grid::ChannelGrid;

#[derive(Clone)]
pub enum Forcing {
    Zero,
    /// Time-independent field.
    Steady(Arc<VectorField>),
    /// Arbitrary provider of the reduced forcing at time `t`.
    TimeDependent(Arc<dyn Fn(f64, &Arc<ChannelGrid>) -> VectorField + Send + Sync>),
}

impl Forcing {
    pub fn zero() -> Self {
        Forcing::Zero
    }

    pub fn steady(f: VectorField) -> Self {
        Forcing::Steady(Arc::new(f))
    }

    pub fn time_dependent(
        f: impl Fn(f64, &Arc<ChannelGrid>) -> VectorField + Send + Sync + 'static,
    ) -> Self {
        Forcing::TimeDependent(Arc::new(f))
    }

    pub fn eval(&self, t: f64, grid: &Arc<ChannelGrid>) -> Option<VectorField> {
        match self {
            Forcing::Zero => None,
            Forcing::Steady(f) => Some(f.as_ref().clone()),
            Forcing::TimeDependent(f) => Some(f(t, grid)),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Forcing::Zero)
    }
}

impl std::fmt::Debug for Forcing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Forcing::Zero => write!(f, "Forcing::Zero"),
            Forcing::Steady(_) => write!(f, "Forcing::Steady"),
            Forcing::TimeDependent(_) => write!(f, "Forcing::TimeDependent"),
        }
    }
}
