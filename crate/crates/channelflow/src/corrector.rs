//! Closed-form boundary-layer corrector and its verified bounds.
//!
//! The corrector is built from the outflow trace of the inviscid solution:
//!
//! ```text
//! psi      = v1(x1, 0) * (nu / U) * (1 - exp(-U x2 / nu))
//! z_tilde  = perp_grad(psi)
//! z        = perp_grad(phi * psi)     with a cutoff phi(x2)
//! ```
//!
//! Every derivative of `z` is evaluated from the analytic expressions, never
//! by differencing the grid: the layer has slope `U / nu`, and the whole
//! energy argument rests on the identity `nu d2 z~1 - U^2 z~1 = 0`, which a
//! finite-difference gradient would destroy. `z` equals `(-v1, 0)` on the
//! outflow wall exactly, vanishes identically above `x2 = h/2`, and is
//! divergence-free as a perpendicular gradient.

use std::sync::Arc;

use ndarray::{Array1, Array2};

use crate::error::{ChannelError, Result};
use crate::fields::{GradientField, ScalarField, VectorField};
use crate::grid::{BackgroundFlow, ChannelGrid};
use crate::smooth;

/// Smooth wall-normal cutoff: identically 1 on `[0, h/4]`, identically 0 on
/// `[h/2, h]`, monotone in between, with analytic derivatives.
#[derive(Debug, Clone, Copy)]
pub struct CutoffSpec {
    pub plateau_end: f64,
    pub support_end: f64,
}

impl CutoffSpec {
    pub fn standard(height: f64) -> Self {
        Self { plateau_end: height / 4.0, support_end: height / 2.0 }
    }

    #[inline]
    fn s(&self, x2: f64) -> f64 {
        (x2 - self.plateau_end) / (self.support_end - self.plateau_end)
    }

    pub fn phi(&self, x2: f64) -> f64 {
        1.0 - smooth::step(self.s(x2))
    }

    pub fn phi_d1(&self, x2: f64) -> f64 {
        let w = self.support_end - self.plateau_end;
        -smooth::step_d1(self.s(x2)) / w
    }

    pub fn phi_d2(&self, x2: f64) -> f64 {
        let w = self.support_end - self.plateau_end;
        -smooth::step_d2(self.s(x2)) / (w * w)
    }
}

/// Trace data feeding the corrector: the outflow tangential trace, its
/// tangential derivatives, and its time derivative.
#[derive(Debug, Clone)]
pub struct TraceSet {
    pub v1: Array1<f64>,
    pub v1_x1: Array1<f64>,
    pub v1_x1x1: Array1<f64>,
    pub dv1_dt: Array1<f64>,
    pub dv1_dt_x1: Array1<f64>,
}

impl TraceSet {
    /// Tangential derivatives computed spectrally from the sampled traces.
    pub fn from_boundary(grid: &ChannelGrid, v1: Array1<f64>, dv1_dt: Array1<f64>) -> Self {
        let v1_x1 = grid.trace_ddx1(&v1);
        let v1_x1x1 = grid.trace_ddx1(&v1_x1);
        let dv1_dt_x1 = grid.trace_ddx1(&dv1_dt);
        Self { v1, v1_x1, v1_x1x1, dv1_dt, dv1_dt_x1 }
    }

    pub fn zeros(grid: &ChannelGrid) -> Self {
        let z = Array1::zeros(grid.n1);
        Self { v1: z.clone(), v1_x1: z.clone(), v1_x1x1: z.clone(), dv1_dt: z.clone(), dv1_dt_x1: z }
    }
}

/// Corrector and all of its closed-form derivatives at one time instant.
#[derive(Debug, Clone)]
pub struct CorrectorFields {
    pub psi: ScalarField,
    pub z: VectorField,
    pub z_tilde: VectorField,
    pub grad_z: GradientField,
    pub grad_z_tilde: GradientField,
    pub dz_dt: VectorField,
    pub nu: f64,
    pub background: BackgroundFlow,
}

/// Evaluate the corrector from trace data. All exponentials come straight
/// from the formulas.
pub fn eval_corrector(
    grid: &Arc<ChannelGrid>,
    traces: &TraceSet,
    nu: f64,
    background: BackgroundFlow,
    cutoff: &CutoffSpec,
) -> Result<CorrectorFields> {
    if !(nu > 0.0) {
        return Err(ChannelError::InvalidInput(format!("nu must be positive, got {nu}")));
    }
    if !(background.u > 0.0) {
        return Err(ChannelError::InvalidInput("background U must be positive".into()));
    }
    let n1 = grid.n1;
    if traces.v1.len() != n1 {
        return Err(ChannelError::GridMismatch);
    }
    let u = background.u;
    let n = grid.x2.len();

    // wall-normal profiles
    let mut expf = Array1::zeros(n);
    let mut one_minus = Array1::zeros(n);
    let mut phi = Array1::zeros(n);
    let mut phi1 = Array1::zeros(n);
    let mut phi2 = Array1::zeros(n);
    for j in 0..n {
        let x2 = grid.x2[j];
        expf[j] = (-u * x2 / nu).exp();
        one_minus[j] = 1.0 - expf[j];
        phi[j] = cutoff.phi(x2);
        phi1[j] = cutoff.phi_d1(x2);
        phi2[j] = cutoff.phi_d2(x2);
    }
    let shape = (n1, n);
    let mut psi = Array2::zeros(shape);
    let mut psi_t = Array2::zeros(shape);
    let mut zt1 = Array2::zeros(shape);
    let mut zt2 = Array2::zeros(shape);
    let mut gt11 = Array2::zeros(shape); // d1 z~1
    let mut gt21 = Array2::zeros(shape); // d2 z~1
    let mut gt12 = Array2::zeros(shape); // d1 z~2
    let mut gt22 = Array2::zeros(shape); // d2 z~2
    let mut zt1_t = Array2::zeros(shape);
    let mut zt2_t = Array2::zeros(shape);
    let nu_over_u = nu / u;
    let u_over_nu = u / nu;
    for i in 0..n1 {
        let tr = traces.v1[i];
        let trx = traces.v1_x1[i];
        let trxx = traces.v1_x1x1[i];
        let trt = traces.dv1_dt[i];
        let trtx = traces.dv1_dt_x1[i];
        for j in 0..n {
            let e = expf[j];
            let om = one_minus[j];
            psi[[i, j]] = tr * nu_over_u * om;
            psi_t[[i, j]] = trt * nu_over_u * om;
            zt1[[i, j]] = -tr * e;
            zt2[[i, j]] = nu_over_u * om * trx;
            gt11[[i, j]] = -trx * e;
            gt21[[i, j]] = tr * u_over_nu * e;
            gt12[[i, j]] = nu_over_u * om * trxx;
            gt22[[i, j]] = e * trx;
            zt1_t[[i, j]] = -trt * e;
            zt2_t[[i, j]] = nu_over_u * om * trtx;
        }
    }

    let apply_phi = |f: &Array2<f64>, p: &Array1<f64>| -> Array2<f64> {
        let mut out = f.clone();
        for i in 0..n1 {
            for j in 0..n {
                out[[i, j]] *= p[j];
            }
        }
        out
    };

    // z = (phi z~1 - phi' psi, phi z~2)
    let mut z1 = apply_phi(&zt1, &phi);
    {
        let corr = apply_phi(&psi, &phi1);
        z1 -= &corr;
    }
    let z2 = apply_phi(&zt2, &phi);

    // grad z = phi grad z~ + [[-phi' z~2, 2 phi' z~1 - psi phi''], [0, phi' z~2]]
    let mut g11 = apply_phi(&gt11, &phi);
    g11 -= &apply_phi(&zt2, &phi1);
    let mut g21 = apply_phi(&gt21, &phi);
    g21 += &apply_phi(&zt1, &phi1).mapv(|v| 2.0 * v);
    g21 -= &apply_phi(&psi, &phi2);
    let g12 = apply_phi(&gt12, &phi);
    let mut g22 = apply_phi(&gt22, &phi);
    g22 += &apply_phi(&zt2, &phi1);

    // time derivative: same formulas with the trace replaced by its rate
    let mut dz1 = apply_phi(&zt1_t, &phi);
    dz1 -= &apply_phi(&psi_t, &phi1);
    let dz2 = apply_phi(&zt2_t, &phi);

    Ok(CorrectorFields {
        psi: ScalarField::from_values(grid, psi),
        z: VectorField::from_components(grid, z1, z2),
        z_tilde: VectorField::from_components(grid, zt1, zt2),
        grad_z: GradientField::new(grid, g11, g21, g12, g22),
        grad_z_tilde: GradientField::new(grid, gt11, gt21, gt12, gt22),
        dz_dt: VectorField::from_components(grid, dz1, dz2),
        nu,
        background,
    })
}

impl CorrectorFields {
    /// `z . grad z` assembled from the closed forms.
    pub fn z_advect_z(&self) -> VectorField {
        self.grad_z.advected_by(&self.z)
    }

    /// `U . grad z` assembled from the closed forms.
    pub fn background_advect_z(&self) -> VectorField {
        let grid = self.z.grid().clone();
        let (a, w) = self.background.velocity();
        let bg = VectorField::constant(&grid, a, w);
        self.grad_z.advected_by(&bg)
    }
}

/// Max-over-nodes of `|nu d2 z~1 - U^2 z~1|`, the cancellation the whole
/// estimate of the combined inertial-plus-diffusive term rests on. The
/// contract is machine precision relative to `U * max|z~1|`.
pub fn key_cancellation_residual(c: &CorrectorFields) -> f64 {
    let u2 = -c.background.u; // vertical background component
    let d2zt1 = &c.grad_z_tilde.d2c1;
    let zt1 = &c.z_tilde.c1;
    let mut m: f64 = 0.0;
    for (d, z) in d2zt1.iter().zip(zt1.iter()) {
        m = m.max((c.nu * d - u2 * z).abs());
    }
    m
}

/// Natural scale for the cancellation residual.
pub fn key_cancellation_scale(c: &CorrectorFields) -> f64 {
    let zmax = c.z_tilde.c1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    c.background.u * zmax
}

/// The nine corrector norms whose viscosity scaling the estimates predict.
#[derive(Debug, Clone, Copy)]
pub struct NormTable {
    pub z1: f64,
    pub z2: f64,
    pub z: f64,
    pub dz_dt: f64,
    pub d1z1: f64,
    pub d2z1: f64,
    pub d1z2: f64,
    pub d2z2: f64,
    pub z_grad_z: f64,
}

impl NormTable {
    pub const LABELS: [&'static str; 9] =
        ["z1", "z2", "z", "dz_dt", "d1z1", "d2z1", "d1z2", "d2z2", "z_grad_z"];

    /// Predicted log-log slopes in nu, in the same order as `LABELS`.
    pub const PREDICTED_SLOPES: [f64; 9] = [0.5, 1.0, 0.5, 0.5, 0.5, -0.5, 1.0, 0.5, 0.5];

    pub fn as_array(&self) -> [f64; 9] {
        [
            self.z1, self.z2, self.z, self.dz_dt, self.d1z1, self.d2z1, self.d1z2, self.d2z2,
            self.z_grad_z,
        ]
    }
}

/// Quadrature evaluation of the corrector norms. Errors when the mesh does
/// not resolve the layer.
pub fn corrector_norm_table(c: &CorrectorFields) -> Result<NormTable> {
    let grid = c.z.grid().clone();
    let required = c.nu / (2.0 * c.background.u);
    let actual = grid.min_spacing();
    if actual > required * (1.0 + 1e-12) {
        return Err(ChannelError::UnderResolvedLayer { required, actual });
    }
    let zadv = c.z_advect_z();
    Ok(NormTable {
        z1: grid.l2_norm_values(&c.z.c1),
        z2: grid.l2_norm_values(&c.z.c2),
        z: c.z.l2_norm(),
        dz_dt: c.dz_dt.l2_norm(),
        d1z1: grid.l2_norm_values(&c.grad_z.d1c1),
        d2z1: grid.l2_norm_values(&c.grad_z.d2c1),
        d1z2: grid.l2_norm_values(&c.grad_z.d1c2),
        d2z2: grid.l2_norm_values(&c.grad_z.d2c2),
        z_grad_z: zadv.l2_norm(),
    })
}

/// Weighted norms of `d2 z1`: `||x2^2 d2 z1||_inf` and `||x2 d2 z1||_2`.
#[derive(Debug, Clone, Copy)]
pub struct WeightedBounds {
    pub winf: f64,
    pub w2: f64,
}

pub fn weighted_bound_check(c: &CorrectorFields, trace_sup: f64) -> Result<WeightedBounds> {
    let grid = c.z.grid().clone();
    let n = grid.x2.len();
    let n1 = grid.n1;
    let d2z1 = &c.grad_z.d2c1;
    let mut winf: f64 = 0.0;
    let mut weighted = Array2::zeros((n1, n));
    for i in 0..n1 {
        for j in 0..n {
            let x2 = grid.x2[j];
            let v = d2z1[[i, j]];
            winf = winf.max(x2 * x2 * v.abs());
            weighted[[i, j]] = x2 * v;
        }
    }
    let w2 = grid.l2_norm_values(&weighted);
    if trace_sup == 0.0 && (winf > 0.0 || w2 > 0.0) {
        return Err(ChannelError::Inconsistent(
            "zero trace sup with nonzero weighted corrector norms".into(),
        ));
    }
    Ok(WeightedBounds { winf, w2 })
}

/// Discrete sup over the mesh of `x2^2 (U/nu) exp(-U x2 / nu)`; the analytic
/// value is `4 e^{-2} nu / U`.
pub fn pure_layer_sup(grid: &ChannelGrid, nu: f64, u: f64) -> f64 {
    let c = u / nu;
    grid.x2.iter().fold(0.0f64, |m, &x| m.max(x * x * c * (-c * x).exp()))
}

/// Trapezoid evaluation of `int_0^h x2^2 exp(-2 U x2 / nu) dx2`; the analytic
/// half-line value is `nu^3 / (4 U^3)`.
pub fn layer_second_moment(grid: &ChannelGrid, nu: f64, u: f64) -> f64 {
    let c = 2.0 * u / nu;
    let mut acc = 0.0;
    for j in 0..grid.x2.len() {
        let x = grid.x2[j];
        acc += grid.wt_x2[j] * x * x * (-c * x).exp();
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ChannelGeometry;

    fn study_grid(nu: f64) -> Arc<ChannelGrid> {
        let geom = ChannelGeometry::new(1.0, 1.0).unwrap();
        ChannelGrid::for_boundary_layer(geom, 16, nu, 10.0, 1.0 / 24.0).unwrap()
    }

    fn sin_traces(grid: &ChannelGrid) -> TraceSet {
        let two_pi = 2.0 * std::f64::consts::PI;
        let v1 = Array1::from_iter((0..grid.n1).map(|i| (two_pi * grid.x1[i]).sin()));
        TraceSet::from_boundary(grid, v1.clone(), v1)
    }

    fn eval(nu: f64) -> (Arc<ChannelGrid>, CorrectorFields) {
        let g = study_grid(nu);
        let traces = sin_traces(&g);
        let bg = BackgroundFlow::new(0.0, 1.0).unwrap();
        let cut = CutoffSpec::standard(1.0);
        let c = eval_corrector(&g, &traces, nu, bg, &cut).unwrap();
        (g, c)
    }

    #[test]
    fn cutoff_plateau_and_support() {
        let cut = CutoffSpec::standard(1.0);
        assert_eq!(cut.phi(0.0), 1.0);
        assert_eq!(cut.phi(0.25), 1.0);
        assert_eq!(cut.phi(0.5), 0.0);
        assert_eq!(cut.phi(0.9), 0.0);
        assert_eq!(cut.phi_d1(0.1), 0.0);
        // derivative consistency against centered differences
        for &x in &[0.3, 0.35, 0.42, 0.47] {
            let d = 1e-5;
            let fd = (cut.phi(x + d) - cut.phi(x - d)) / (2.0 * d);
            assert!((fd - cut.phi_d1(x)).abs() < 1e-6 * (1.0 + cut.phi_d1(x).abs()));
            let fd2 = (cut.phi_d1(x + d) - cut.phi_d1(x - d)) / (2.0 * d);
            assert!((fd2 - cut.phi_d2(x)).abs() < 1e-4 * (1.0 + cut.phi_d2(x).abs()));
        }
    }

    #[test]
    fn zero_trace_gives_zero_fields() {
        let g = study_grid(0.01);
        let traces = TraceSet::zeros(&g);
        let bg = BackgroundFlow::new(0.0, 1.0).unwrap();
        let c = eval_corrector(&g, &traces, 0.01, bg, &CutoffSpec::standard(1.0)).unwrap();
        assert_eq!(c.z.linf_norm(), 0.0);
        assert_eq!(c.dz_dt.linf_norm(), 0.0);
        assert_eq!(key_cancellation_residual(&c), 0.0);
        let wb = weighted_bound_check(&c, 0.0).unwrap();
        assert_eq!(wb.winf, 0.0);
    }

    #[test]
    fn outflow_row_matches_negative_trace_exactly() {
        let (g, c) = eval(0.01);
        let traces = sin_traces(&g);
        for i in 0..g.n1 {
            assert_eq!(c.z.c1[[i, 0]], -traces.v1[i]);
            assert_eq!(c.z.c2[[i, 0]], 0.0);
        }
    }

    #[test]
    fn z2_sup_bounded_by_formula() {
        let (_, c) = eval(0.01);
        let two_pi = 2.0 * std::f64::consts::PI;
        let bound = 0.01 * two_pi; // (nu / U) * max |d1 v1|
        let sup = c.z.c2.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(sup <= bound * (1.0 + 1e-12), "sup {sup} vs bound {bound}");
    }

    #[test]
    fn key_cancellation_is_machine_zero_with_closed_forms() {
        for nu in [1e-1, 1e-2, 1e-3] {
            let (_, c) = eval(nu);
            let r = key_cancellation_residual(&c);
            let scale = key_cancellation_scale(&c);
            assert!(r <= 1e-12 * scale, "nu={nu}: residual {r} vs scale {scale}");
        }
    }

    #[test]
    fn grid_differenced_layer_derivative_is_strictly_worse() {
        let nu = 1e-2;
        let (g, c) = eval(nu);
        // differencing the stored z~1 on the grid destroys the cancellation
        let d2_grid = g.ddx2_values(&c.z_tilde.c1);
        let mut worst: f64 = 0.0;
        for (idx, z) in c.z_tilde.c1.iter().enumerate() {
            let d = d2_grid.as_slice().unwrap()[idx];
            worst = worst.max((nu * d + c.background.u * z).abs());
        }
        let closed = key_cancellation_residual(&c);
        let scale = key_cancellation_scale(&c);
        assert!(closed <= 1e-12 * scale);
        assert!(worst > 1e3 * closed.max(1e-16 * scale), "grid path {worst} vs closed {closed}");
    }

    #[test]
    fn linearity_in_the_trace() {
        let nu = 5e-3;
        let g = study_grid(nu);
        let bg = BackgroundFlow::new(0.0, 1.0).unwrap();
        let cut = CutoffSpec::standard(1.0);
        let t = sin_traces(&g);
        let alpha = 3.25;
        let scaled = TraceSet {
            v1: &t.v1 * alpha,
            v1_x1: &t.v1_x1 * alpha,
            v1_x1x1: &t.v1_x1x1 * alpha,
            dv1_dt: &t.dv1_dt * alpha,
            dv1_dt_x1: &t.dv1_dt_x1 * alpha,
        };
        let c1 = eval_corrector(&g, &t, nu, bg, &cut).unwrap();
        let c2 = eval_corrector(&g, &scaled, nu, bg, &cut).unwrap();
        let ulp = 4.0 * f64::EPSILON;
        for (a, b) in c1.z.c1.iter().zip(c2.z.c1.iter()) {
            assert!((*a * alpha - *b).abs() <= ulp * b.abs());
        }
        for (a, b) in c1.grad_z.d2c1.iter().zip(c2.grad_z.d2c1.iter()) {
            assert!((*a * alpha - *b).abs() <= ulp * b.abs());
        }
    }

    #[test]
    fn support_confined_below_half_height() {
        let (g, c) = eval(0.02);
        for i in 0..g.n1 {
            for j in 0..g.x2.len() {
                if g.x2[j] >= 0.5 {
                    assert_eq!(c.z.c1[[i, j]], 0.0);
                    assert_eq!(c.z.c2[[i, j]], 0.0);
                    assert_eq!(c.grad_z.d1c1[[i, j]], 0.0);
                    assert_eq!(c.grad_z.d2c1[[i, j]], 0.0);
                    assert_eq!(c.grad_z.d1c2[[i, j]], 0.0);
                    assert_eq!(c.grad_z.d2c2[[i, j]], 0.0);
                }
            }
        }
    }

    #[test]
    fn divergence_free_in_closed_form() {
        let (g, c) = eval(0.01);
        // d1 z1 + d2 z2 from the closed forms
        let div = &c.grad_z.d1c1 + &c.grad_z.d2c2;
        let scale = g.l2_norm_values(&c.grad_z.d1c1) + g.l2_norm_values(&c.grad_z.d2c2);
        assert!(g.l2_norm_values(&div) <= 1e-13 * scale);
    }

    #[test]
    fn closed_form_gradient_agrees_with_grid_away_from_layer() {
        let nu = 0.02;
        let (g, c) = eval(nu);
        let grid_grad = c.z.gradient();
        // compare on nodes above 12 layer widths and below the cutoff support
        let mut max_rel: f64 = 0.0;
        let scale = c.grad_z.d2c1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..g.n1 {
            for j in 0..g.x2.len() {
                let x2 = g.x2[j];
                if x2 > 12.0 * nu && x2 < 0.45 {
                    let d = (grid_grad.d2c1[[i, j]] - c.grad_z.d2c1[[i, j]]).abs();
                    max_rel = max_rel.max(d / scale);
                }
            }
        }
        assert!(max_rel < 1e-2, "closed-form vs grid gradient mismatch {max_rel}");
    }

    #[test]
    fn norm_table_scaling_under_nu_halving() {
        let bg = BackgroundFlow::new(0.0, 1.0).unwrap();
        let cut = CutoffSpec::standard(1.0);
        let table = |nu: f64| -> NormTable {
            let g = study_grid(nu);
            let c = eval_corrector(&g, &sin_traces(&g), nu, bg, &cut).unwrap();
            corrector_norm_table(&c).unwrap()
        };
        let t1 = table(0.01);
        let t2 = table(0.005);
        let sqrt2 = std::f64::consts::SQRT_2;
        let r_z1 = t1.z1 / t2.z1;
        assert!((r_z1 - sqrt2).abs() < 0.1 * sqrt2, "z1 ratio {r_z1}");
        let r_d2z1 = t2.d2z1 / t1.d2z1;
        assert!((r_d2z1 - sqrt2).abs() < 0.1 * sqrt2, "d2z1 ratio {r_d2z1}");
    }

    #[test]
    fn under_resolved_layer_is_reported() {
        let geom = ChannelGeometry::new(1.0, 1.0).unwrap();
        let g = ChannelGrid::build(geom, 16, 16, 1.0).unwrap(); // coarse uniform
        let nu = 1e-3;
        let bg = BackgroundFlow::new(0.0, 1.0).unwrap();
        let c = eval_corrector(&g, &sin_traces(&g), nu, bg, &CutoffSpec::standard(1.0)).unwrap();
        assert!(matches!(
            corrector_norm_table(&c),
            Err(ChannelError::UnderResolvedLayer { .. })
        ));
    }

    #[test]
    fn homogeneity_of_z_norm_in_trace_amplitude() {
        let nu = 1e-2;
        let g = study_grid(nu);
        let bg = BackgroundFlow::new(0.0, 1.0).unwrap();
        let cut = CutoffSpec::standard(1.0);
        let base = sin_traces(&g);
        let mut prev: Option<f64> = None;
        for t in [0.5, 1.0, 2.0, 4.0] {
            let tr = TraceSet {
                v1: &base.v1 * t,
                v1_x1: &base.v1_x1 * t,
                v1_x1x1: &base.v1_x1x1 * t,
                dv1_dt: &base.dv1_dt * t,
                dv1_dt_x1: &base.dv1_dt_x1 * t,
            };
            let c = eval_corrector(&g, &tr, nu, bg, &cut).unwrap();
            let ratio = c.z.l2_norm() / (nu.sqrt() * t);
            if let Some(p) = prev {
                assert!((ratio - p).abs() <= 1e-12 * p);
            }
            prev = Some(ratio);
        }
    }

    #[test]
    fn lemma_layer_oracles() {
        for nu in [1e-2, 1e-3] {
            let g = study_grid(nu);
            let sup = pure_layer_sup(&g, nu, 1.0);
            let want_sup = 4.0 * (-2.0f64).exp() * nu;
            assert!(
                (sup - want_sup).abs() <= 0.01 * want_sup,
                "nu={nu}: sup {sup} vs {want_sup}"
            );
            let m = layer_second_moment(&g, nu, 1.0);
            let want_m = nu * nu * nu / 4.0;
            assert!((m - want_m).abs() <= 0.01 * want_m, "nu={nu}: moment {m} vs {want_m}");
        }
    }
}
