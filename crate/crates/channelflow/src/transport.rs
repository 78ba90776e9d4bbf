//! Advective right-hand sides shared by the inviscid and viscous solvers.
//!
//! Both systems advect the homogenized velocity by the total velocity
//! `(v1 + a, v2 - U)`: spectral derivatives in the periodic direction,
//! upwind-biased stencils in the wall-normal direction (the vertical
//! transport runs inflow-to-outflow), and 2/3-rule dealiasing applied to the
//! assembled products.

use ndarray::Array2;

use crate::error::{ChannelError, Result};
use crate::fields::VectorField;
use crate::grid::{BackgroundFlow, ChannelGrid};

/// Which advective terms enter the right-hand side. The reduced modes exist
/// for verification runs (translation and diffusion checks).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum AdvectionMode {
    /// `-(v + U) . grad v` (the background-coupling and self-advection terms).
    Full,
    /// `-U . grad v` only.
    BackgroundOnly,
    /// No advection.
    None,
}

/// Total advecting velocity `(v1 + a, v2 - U)`.
pub fn total_velocity(v: &VectorField, bg: BackgroundFlow) -> (Array2<f64>, Array2<f64>) {
    let (a, w) = bg.velocity();
    (&v.c1 + a, &v.c2 + w)
}

/// `- (advecting . grad) v`, dealiased.
pub fn advective_rhs(v: &VectorField, bg: BackgroundFlow, mode: AdvectionMode) -> VectorField {
    let grid = v.grid().clone();
    match mode {
        AdvectionMode::None => VectorField::zeros(&grid),
        AdvectionMode::BackgroundOnly => {
            let (a, w) = bg.velocity();
            let mut r1 = grid.ddx1_values(&v.c1).mapv(|d| -a * d);
            let mut r2 = grid.ddx1_values(&v.c2).mapv(|d| -a * d);
            let speed = Array2::from_elem(grid.shape(), w);
            r1 -= &grid.ddx2_upwind(&v.c1, &speed).mapv(|d| w * d);
            r2 -= &grid.ddx2_upwind(&v.c2, &speed).mapv(|d| w * d);
            VectorField::from_components(&grid, r1, r2)
        }
        AdvectionMode::Full => {
            let (u1, u2) = total_velocity(v, bg);
            let mut r1 = &u1 * &grid.ddx1_values(&v.c1);
            r1 += &(&u2 * &grid.ddx2_upwind(&v.c1, &u2));
            let mut r2 = &u1 * &grid.ddx1_values(&v.c2);
            r2 += &(&u2 * &grid.ddx2_upwind(&v.c2, &u2));
            let r1 = grid.dealias_values(&r1).mapv(|x| -x);
            let r2 = grid.dealias_values(&r2).mapv(|x| -x);
            VectorField::from_components(&grid, r1, r2)
        }
    }
}

/// `U . grad f` with the same upwind stencils the solver uses at state `v`
/// (the bias follows the sign of the total vertical velocity). Used by the
/// energy diagnostics to assemble terms with the operators that actually
/// advanced the solution.
pub fn background_advection_upwind(
    v: &VectorField,
    f: &VectorField,
    bg: BackgroundFlow,
) -> VectorField {
    let grid = v.grid().clone();
    let (a, w) = bg.velocity();
    let (_, u2) = total_velocity(v, bg);
    let mut r1 = grid.ddx1_values(&f.c1).mapv(|d| a * d);
    let mut r2 = grid.ddx1_values(&f.c2).mapv(|d| a * d);
    r1 += &grid.ddx2_upwind(&f.c1, &u2).mapv(|d| w * d);
    r2 += &grid.ddx2_upwind(&f.c2, &u2).mapv(|d| w * d);
    VectorField::from_components(
        &grid,
        grid.dealias_values(&r1),
        grid.dealias_values(&r2),
    )
}

/// Advective CFL number for step `dt` at the current state.
pub fn cfl_number(v: &VectorField, bg: BackgroundFlow, dt: f64) -> f64 {
    let grid = v.grid();
    let (u1, u2) = total_velocity(v, bg);
    let gaps = grid.spacings();
    let n = grid.x2.len();
    let mut rate: f64 = 0.0;
    for i in 0..grid.n1 {
        for j in 0..n {
            let local_gap = if j == 0 {
                gaps[0]
            } else if j == n - 1 {
                gaps[n - 2]
            } else {
                gaps[j - 1].min(gaps[j])
            };
            let r = u1[[i, j]].abs() / grid.dx1 + u2[[i, j]].abs() / local_gap;
            rate = rate.max(r);
        }
    }
    rate * dt
}

/// Error with a suggested step size when the CFL bound is exceeded.
pub fn check_cfl(v: &VectorField, bg: BackgroundFlow, dt: f64, cfl_max: f64) -> Result<()> {
    let c = cfl_number(v, bg, dt);
    if c > cfl_max {
        let suggested = 0.5 * cfl_max / (c / dt);
        return Err(ChannelError::CflViolation { cfl: c, suggested_dt: suggested });
    }
    Ok(())
}

/// Step size with CFL number `cfl` for speeds bounded by `speed_margin` above
/// the background.
pub fn dt_for_cfl(grid: &ChannelGrid, bg: BackgroundFlow, speed_margin: f64, cfl: f64) -> f64 {
    let u1 = bg.a.abs() + speed_margin;
    let u2 = bg.u + speed_margin;
    let min_gap = grid.min_spacing();
    cfl / (u1 / grid.dx1 + u2 / min_gap)
}
