//! Time integration of the homogenized inviscid system: no-penetration on
//! both walls, full homogeneous velocity on the inflow wall, nothing imposed
//! on the outflow tangential component (the characteristic leaves the
//! domain there).
//!
//! SSP-RK3 stages; each inner Euler update applies the advective right-hand
//! side, pins the inflow wall strongly, and projects. Convex stage
//! combinations preserve both constraint sets, so the stated invariants hold
//! after every full step at solver precision.

use ndarray::Array1;

use crate::error::Result;
use crate::fields::VectorField;
use crate::forcing::Forcing;
use crate::grid::{BackgroundFlow, ChannelGrid, Wall};
use crate::poisson::{LerayProjector, WallBc};
use crate::transport::{advective_rhs, check_cfl, AdvectionMode};

use std::sync::Arc;

/// Fixed-step run parameters. Snapshots are taken at step 0 and every
/// `snapshot_stride` steps after; `n_steps` should be a multiple of the
/// stride so the final time is recorded.
#[derive(Debug, Clone, Copy)]
pub struct RunParams {
    pub dt: f64,
    pub n_steps: usize,
    pub snapshot_stride: usize,
}

impl RunParams {
    pub fn t_final(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }
}

/// Instantaneous solver state.
#[derive(Debug, Clone)]
pub struct EulerState {
    pub v: VectorField,
    pub t: f64,
}

/// One recorded snapshot: the field, the outflow traces feeding the
/// corrector, and scalar monitors.
#[derive(Debug, Clone)]
pub struct EulerSnapshot {
    pub t: f64,
    pub v: VectorField,
    /// Tangential trace on the outflow wall.
    pub trace_v1: Array1<f64>,
    /// Time derivative of the trace, read off the projected right-hand side
    /// (not by time differencing).
    pub trace_dv1_dt: Array1<f64>,
    pub energy: f64,
    pub trace_sup: f64,
}

#[derive(Debug, Clone)]
pub struct EulerRun {
    pub snapshots: Vec<EulerSnapshot>,
    pub dt: f64,
}

pub struct EulerSolver {
    grid: Arc<ChannelGrid>,
    pub background: BackgroundFlow,
    pub forcing: Forcing,
    pub advection: AdvectionMode,
    projector: LerayProjector,
    pub cfl_max: f64,
}

impl EulerSolver {
    pub fn new(
        grid: &Arc<ChannelGrid>,
        background: BackgroundFlow,
        forcing: Forcing,
        advection: AdvectionMode,
    ) -> Result<Self> {
        let projector = LerayProjector::new(grid, WallBc::NoPenetration, WallBc::FullDirichlet)?;
        Ok(Self {
            grid: grid.clone(),
            background,
            forcing,
            advection,
            projector,
            cfl_max: 1.0,
        })
    }

    pub fn grid(&self) -> &Arc<ChannelGrid> {
        &self.grid
    }

    /// Advective + forcing right-hand side before projection.
    pub fn rhs(&self, v: &VectorField, t: f64) -> VectorField {
        let mut r = advective_rhs(v, self.background, self.advection);
        if let Some(f) = self.forcing.eval(t, &self.grid) {
            r = &r + &f;
        }
        r
    }

    /// Semi-discrete time derivative: inflow row pinned, then projected.
    /// The outflow row of the first component is the trace rate used by the
    /// corrector.
    pub fn projected_rhs(&self, v: &VectorField, t: f64) -> VectorField {
        let mut r = self.rhs(v, t);
        let top = self.grid.wall_row(Wall::Inflow);
        for i in 0..self.grid.n1 {
            r.c1[[i, top]] = 0.0;
            r.c2[[i, top]] = 0.0;
        }
        let (c1, c2) = self.projector.project_values(&self.grid, &r.c1, &r.c2);
        VectorField::from_components(&self.grid, c1, c2)
    }

    fn stage(&self, v: &VectorField, t: f64, dt: f64) -> VectorField {
        let r = self.rhs(v, t);
        let mut w1 = &v.c1 + &r.c1.mapv(|x| x * dt);
        let mut w2 = &v.c2 + &r.c2.mapv(|x| x * dt);
        let top = self.grid.wall_row(Wall::Inflow);
        for i in 0..self.grid.n1 {
            w1[[i, top]] = 0.0;
            w2[[i, top]] = 0.0;
        }
        let (c1, c2) = self.projector.project_values(&self.grid, &w1, &w2);
        VectorField::from_components(&self.grid, c1, c2)
    }

    /// One SSP-RK3 step. Errors when the advective CFL bound is violated.
    pub fn step(&self, state: &EulerState, dt: f64) -> Result<EulerState> {
        check_cfl(&state.v, self.background, dt, self.cfl_max)?;
        let v = &state.v;
        let t = state.t;
        let u1 = self.stage(v, t, dt);
        let u2s = self.stage(&u1, t + dt, dt);
        let mut u2 = VectorField::zeros(&self.grid);
        u2.c1 = 0.75 * &v.c1 + 0.25 * &u2s.c1;
        u2.c2 = 0.75 * &v.c2 + 0.25 * &u2s.c2;
        let u3s = self.stage(&u2, t + 0.5 * dt, dt);
        let mut out = VectorField::zeros(&self.grid);
        out.c1 = (1.0 / 3.0) * &v.c1 + (2.0 / 3.0) * &u3s.c1;
        out.c2 = (1.0 / 3.0) * &v.c2 + (2.0 / 3.0) * &u3s.c2;
        Ok(EulerState { v: out, t: t + dt })
    }

    fn snapshot(&self, v: &VectorField, t: f64) -> EulerSnapshot {
        let trace_v1 = v.boundary_trace(Wall::Outflow, 1).values;
        let dvdt = self.projected_rhs(v, t);
        let trace_dv1_dt = dvdt.boundary_trace(Wall::Outflow, 1).values;
        let trace_sup = trace_v1.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        EulerSnapshot { t, v: v.clone(), trace_v1, trace_dv1_dt, energy: v.kinetic_energy(), trace_sup }
    }

    /// Fixed-dt loop recording snapshots and outflow traces.
    pub fn run(&self, initial: &VectorField, params: &RunParams) -> Result<EulerRun> {
        let mut snapshots = Vec::with_capacity(params.n_steps / params.snapshot_stride + 1);
        let mut state = EulerState { v: initial.clone(), t: 0.0 };
        snapshots.push(self.snapshot(&state.v, 0.0));
        for k in 0..params.n_steps {
            state = self.step(&state, params.dt)?;
            state.t = (k + 1) as f64 * params.dt; // avoid accumulated sums
            if (k + 1) % params.snapshot_stride == 0 {
                snapshots.push(self.snapshot(&state.v, state.t));
            }
        }
        Ok(EulerRun { snapshots, dt: params.dt })
    }
}
