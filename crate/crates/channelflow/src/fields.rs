//! Grid-sampled scalar and vector fields, boundary traces, vector calculus,
//! the divergence-free projection, and initial data satisfying the standing
//! boundary-compatibility hypotheses.

use std::sync::Arc;

use ndarray::{Array1, Array2};

use crate::error::{ChannelError, Result};
use crate::grid::{ChannelGrid, Wall};
use crate::poisson::{LerayProjector, WallBc};
use crate::smooth;

/// Real samples at the (x1, x2) collocation nodes.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<ChannelGrid>,
    pub values: Array2<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &Arc<ChannelGrid>) -> Self {
        Self { grid: grid.clone(), values: Array2::zeros(grid.shape()) }
    }

    pub fn from_values(grid: &Arc<ChannelGrid>, values: Array2<f64>) -> Self {
        assert_eq!(values.dim(), grid.shape());
        Self { grid: grid.clone(), values }
    }

    pub fn from_fn(grid: &Arc<ChannelGrid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let (n1, n) = grid.shape();
        let mut values = Array2::zeros((n1, n));
        for i in 0..n1 {
            for j in 0..n {
                values[[i, j]] = f(grid.x1[i], grid.x2[j]);
            }
        }
        Self { grid: grid.clone(), values }
    }

    pub fn grid(&self) -> &Arc<ChannelGrid> {
        &self.grid
    }

    pub fn ddx1(&self) -> ScalarField {
        Self { grid: self.grid.clone(), values: self.grid.ddx1_values(&self.values) }
    }

    /// Wall-normal derivative: centered second-order stencils at interior
    /// nodes, second-order one-sided stencils at the walls.
    pub fn ddx2(&self) -> ScalarField {
        Self { grid: self.grid.clone(), values: self.grid.ddx2_values(&self.values) }
    }

    pub fn d2dx2(&self) -> ScalarField {
        Self { grid: self.grid.clone(), values: self.grid.d2dx2_values(&self.values) }
    }

    pub fn dealias(&self) -> ScalarField {
        Self { grid: self.grid.clone(), values: self.grid.dealias_values(&self.values) }
    }

    pub fn integrate(&self) -> f64 {
        self.grid.integrate_values(&self.values)
    }

    pub fn l2_norm(&self) -> f64 {
        self.grid.l2_norm_values(&self.values)
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> ScalarField {
        Self { grid: self.grid.clone(), values: &self.values * c }
    }

    pub fn wall_row(&self, wall: Wall) -> Array1<f64> {
        let j = self.grid.wall_row(wall);
        self.values.column(j).to_owned()
    }
}

impl std::ops::Add<&ScalarField> for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        ScalarField { grid: self.grid.clone(), values: &self.values + &rhs.values }
    }
}

impl std::ops::Sub<&ScalarField> for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        ScalarField { grid: self.grid.clone(), values: &self.values - &rhs.values }
    }
}

impl std::ops::Mul<&ScalarField> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: &ScalarField) -> ScalarField {
        ScalarField { grid: self.grid.clone(), values: &self.values * &rhs.values }
    }
}

/// Two-component vector field on the channel grid.
#[derive(Debug, Clone)]
pub struct VectorField {
    grid: Arc<ChannelGrid>,
    pub c1: Array2<f64>,
    pub c2: Array2<f64>,
}

impl VectorField {
    pub fn zeros(grid: &Arc<ChannelGrid>) -> Self {
        let shape = grid.shape();
        Self { grid: grid.clone(), c1: Array2::zeros(shape), c2: Array2::zeros(shape) }
    }

    pub fn from_components(grid: &Arc<ChannelGrid>, c1: Array2<f64>, c2: Array2<f64>) -> Self {
        assert_eq!(c1.dim(), grid.shape());
        assert_eq!(c2.dim(), grid.shape());
        Self { grid: grid.clone(), c1, c2 }
    }

    pub fn from_fn(
        grid: &Arc<ChannelGrid>,
        f1: impl Fn(f64, f64) -> f64,
        f2: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let a = ScalarField::from_fn(grid, f1);
        let b = ScalarField::from_fn(grid, f2);
        Self { grid: grid.clone(), c1: a.values, c2: b.values }
    }

    pub fn constant(grid: &Arc<ChannelGrid>, v1: f64, v2: f64) -> Self {
        let shape = grid.shape();
        Self {
            grid: grid.clone(),
            c1: Array2::from_elem(shape, v1),
            c2: Array2::from_elem(shape, v2),
        }
    }

    pub fn grid(&self) -> &Arc<ChannelGrid> {
        &self.grid
    }

    pub fn component(&self, c: usize) -> ScalarField {
        let values = match c {
            1 => self.c1.clone(),
            2 => self.c2.clone(),
            _ => panic!("component must be 1 or 2"),
        };
        ScalarField { grid: self.grid.clone(), values }
    }

    pub fn l2_norm(&self) -> f64 {
        let a = self.grid.l2_norm_values(&self.c1);
        let b = self.grid.l2_norm_values(&self.c2);
        (a * a + b * b).sqrt()
    }

    pub fn linf_norm(&self) -> f64 {
        let m1 = self.c1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let m2 = self.c2.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        m1.max(m2)
    }

    pub fn kinetic_energy(&self) -> f64 {
        let e = self.grid.integrate_values(&(&self.c1 * &self.c1))
            + self.grid.integrate_values(&(&self.c2 * &self.c2));
        0.5 * e
    }

    pub fn scaled(&self, c: f64) -> VectorField {
        Self { grid: self.grid.clone(), c1: &self.c1 * c, c2: &self.c2 * c }
    }

    pub fn dealias(&self) -> VectorField {
        Self {
            grid: self.grid.clone(),
            c1: self.grid.dealias_values(&self.c1),
            c2: self.grid.dealias_values(&self.c2),
        }
    }

    /// `d1 v1 + d2 v2`: the solenoidality monitor.
    pub fn divergence(&self) -> ScalarField {
        let div = self.grid.ddx1_values(&self.c1) + self.grid.ddx2_values(&self.c2);
        ScalarField { grid: self.grid.clone(), values: div }
    }

    /// Natural magnitude of `divergence` before cancellation.
    pub fn gradient_scale(&self) -> f64 {
        self.grid.l2_norm_values(&self.grid.ddx1_values(&self.c1))
            + self.grid.l2_norm_values(&self.grid.ddx2_values(&self.c2))
    }

    pub fn boundary_trace(&self, wall: Wall, component: usize) -> BoundaryTrace {
        let j = self.grid.wall_row(wall);
        let values = match component {
            1 => self.c1.column(j).to_owned(),
            2 => self.c2.column(j).to_owned(),
            _ => panic!("component must be 1 or 2"),
        };
        BoundaryTrace { grid: self.grid.clone(), wall, values }
    }
}

impl std::ops::Add<&VectorField> for &VectorField {
    type Output = VectorField;
    fn add(self, rhs: &VectorField) -> VectorField {
        VectorField {
            grid: self.grid.clone(),
            c1: &self.c1 + &rhs.c1,
            c2: &self.c2 + &rhs.c2,
        }
    }
}

impl std::ops::Sub<&VectorField> for &VectorField {
    type Output = VectorField;
    fn sub(self, rhs: &VectorField) -> VectorField {
        VectorField {
            grid: self.grid.clone(),
            c1: &self.c1 - &rhs.c1,
            c2: &self.c2 - &rhs.c2,
        }
    }
}

/// Gradient tensor of a vector field: `d<c><j>` holds the derivative of
/// component j in direction c.
#[derive(Debug, Clone)]
pub struct GradientField {
    grid: Arc<ChannelGrid>,
    pub d1c1: Array2<f64>,
    pub d2c1: Array2<f64>,
    pub d1c2: Array2<f64>,
    pub d2c2: Array2<f64>,
}

impl GradientField {
    pub fn new(
        grid: &Arc<ChannelGrid>,
        d1c1: Array2<f64>,
        d2c1: Array2<f64>,
        d1c2: Array2<f64>,
        d2c2: Array2<f64>,
    ) -> Self {
        Self { grid: grid.clone(), d1c1, d2c1, d1c2, d2c2 }
    }

    pub fn grid(&self) -> &Arc<ChannelGrid> {
        &self.grid
    }

    /// Frobenius inner product under the channel quadrature.
    pub fn inner(&self, other: &GradientField) -> f64 {
        self.grid.integrate_values(&(&self.d1c1 * &other.d1c1))
            + self.grid.integrate_values(&(&self.d2c1 * &other.d2c1))
            + self.grid.integrate_values(&(&self.d1c2 * &other.d1c2))
            + self.grid.integrate_values(&(&self.d2c2 * &other.d2c2))
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    /// Directional derivative `u . grad` applied through this gradient.
    pub fn advected_by(&self, u: &VectorField) -> VectorField {
        VectorField {
            grid: self.grid.clone(),
            c1: &(&u.c1 * &self.d1c1) + &(&u.c2 * &self.d2c1),
            c2: &(&u.c1 * &self.d1c2) + &(&u.c2 * &self.d2c2),
        }
    }
}

impl VectorField {
    /// Grid-differenced gradient (spectral in x1, 3-point stencils in x2).
    pub fn gradient(&self) -> GradientField {
        GradientField {
            grid: self.grid.clone(),
            d1c1: self.grid.ddx1_values(&self.c1),
            d2c1: self.grid.ddx2_values(&self.c1),
            d1c2: self.grid.ddx1_values(&self.c2),
            d2c2: self.grid.ddx2_values(&self.c2),
        }
    }
}

/// One component sampled along one wall; periodic in x1.
#[derive(Debug, Clone)]
pub struct BoundaryTrace {
    grid: Arc<ChannelGrid>,
    pub wall: Wall,
    pub values: Array1<f64>,
}

impl BoundaryTrace {
    pub fn new(grid: &Arc<ChannelGrid>, wall: Wall, values: Array1<f64>) -> Self {
        assert_eq!(values.len(), grid.n1);
        Self { grid: grid.clone(), wall, values }
    }

    pub fn zeros(grid: &Arc<ChannelGrid>, wall: Wall) -> Self {
        Self { grid: grid.clone(), wall, values: Array1::zeros(grid.n1) }
    }

    pub fn grid(&self) -> &Arc<ChannelGrid> {
        &self.grid
    }

    /// Spectral tangential derivative along the wall.
    pub fn ddx1(&self) -> BoundaryTrace {
        Self { grid: self.grid.clone(), wall: self.wall, values: self.grid.trace_ddx1(&self.values) }
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// `(-d2 psi, d1 psi)`: divergence-free by operator commutation.
pub fn perp_gradient(psi: &ScalarField) -> VectorField {
    let grid = psi.grid().clone();
    let c1 = -psi.grid().ddx2_values(&psi.values);
    let c2 = psi.grid().ddx1_values(&psi.values);
    VectorField { grid, c1, c2 }
}

/// Wall treatment of the one-shot projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionBc {
    /// Full velocity pinned at both walls.
    NoSlip,
    /// Only the normal component pinned at both walls.
    NoPenetration,
    /// Tangential component free at the outflow wall, pinned at the inflow wall.
    InflowOutflow,
}

impl ProjectionBc {
    pub fn walls(&self) -> (WallBc, WallBc) {
        match self {
            ProjectionBc::NoSlip => (WallBc::FullDirichlet, WallBc::FullDirichlet),
            ProjectionBc::NoPenetration => (WallBc::NoPenetration, WallBc::NoPenetration),
            ProjectionBc::InflowOutflow => (WallBc::NoPenetration, WallBc::FullDirichlet),
        }
    }
}

/// One-shot divergence-free projection. Solvers cache a `LerayProjector`
/// instead of calling this in a loop.
pub fn leray_project(v: &VectorField, bc: ProjectionBc) -> Result<VectorField> {
    let (bottom, top) = bc.walls();
    let projector = LerayProjector::new(v.grid(), bottom, top)?;
    Ok(project_with(&projector, v))
}

pub fn project_with(projector: &LerayProjector, v: &VectorField) -> VectorField {
    let (c1, c2) = projector.project_values(v.grid(), &v.c1, &v.c2);
    VectorField { grid: v.grid().clone(), c1, c2 }
}

/// Homogenized initial data `v0 = perp_gradient(chi)` with
/// `chi = amplitude * c * sin(2 pi mode x1 / L) * bump(x2)`, where the bump
/// vanishes identically on `[0, collar]` and `[h - collar, h]` with margin
/// enough that the discrete derivatives vanish there too, and the constant
/// `c` normalizes the velocity so `amplitude` is the peak speed of the
/// perturbation. The field is divergence-free in the discrete sense by
/// construction and equals zero near both walls, so the full velocity
/// matches the background flow on the boundary.
pub fn make_initial_data(
    grid: &Arc<ChannelGrid>,
    amplitude: f64,
    mode: usize,
    collar: f64,
) -> Result<VectorField> {
    let h = grid.geometry.height;
    if !(collar > 0.0 && collar < 0.5 * h) {
        return Err(ChannelError::InvalidInput(format!(
            "collar must lie in (0, h/2), got {collar}"
        )));
    }
    if mode == 0 || mode as f64 > grid.n1 as f64 / 3.0 {
        return Err(ChannelError::InvalidInput(format!(
            "mode must be in 1..=n1/3, got {mode}"
        )));
    }
    let margin = (h - 2.0 * collar) / 4.5;
    let lo = collar + margin;
    let hi = h - collar - margin;
    let kx = 2.0 * std::f64::consts::PI * mode as f64 / grid.geometry.length;
    // normalize by the analytic peak speed of perp_grad(chi), evaluated on a
    // fixed fine sampling so the constant does not depend on the mesh (the
    // refinement gate reruns the same problem on finer meshes)
    let bump = |x2: f64| smooth::step((x2 - lo) / margin) * smooth::step((hi - x2) / margin);
    let bump_d = |x2: f64| {
        smooth::step_d1((x2 - lo) / margin) / margin * smooth::step((hi - x2) / margin)
            - smooth::step((x2 - lo) / margin) * smooth::step_d1((hi - x2) / margin) / margin
    };
    let mut peak: f64 = 0.0;
    let m = 20000;
    for k in 0..=m {
        let y = h * k as f64 / m as f64;
        peak = peak.max(bump_d(y).abs()).max(kx * bump(y).abs());
    }
    if peak == 0.0 || amplitude == 0.0 {
        return Ok(VectorField::zeros(grid));
    }
    let scale = amplitude / peak;
    let chi = ScalarField::from_fn(grid, |x1, x2| scale * (kx * x1).sin() * bump(x2));
    Ok(perp_gradient(&chi))
}
