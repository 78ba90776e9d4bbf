//! Boundary compatibility checks for the inviscid initial data: the
//! lowest-order condition (tangential data matches the background on the
//! inflow wall) and the next one, which involves the initial pressure
//! solving a Neumann problem.
//!
//! Conventions on the unit frame: the tangent is chosen so (normal, tangent)
//! is positively oriented, so `u^tau = -u1` along the inflow wall and
//! `u^tau = u1` along the outflow wall. Residuals take absolute values, so
//! the orientation does not affect the reported numbers.

use std::sync::Arc;

use ndarray::Array1;

use crate::error::Result;
use crate::fields::{ScalarField, VectorField};
use crate::grid::{BackgroundFlow, ChannelGrid, Wall};
use crate::poisson::{self, PoissonBc};
use crate::smooth;

#[derive(Debug, Clone)]
pub struct CompatReport {
    /// Zero-mean initial pressure.
    pub p0: ScalarField,
    /// `sup over the inflow wall of |u0^tau - U^tau|`.
    pub cond_minus1_residual: f64,
    /// `sup over the inflow wall of |[ -u0 . grad u0 - grad p0 + f(0) ]^tau|`
    /// (the background is steady, so the left-hand side vanishes).
    pub cond_0_residual: f64,
    /// Relative interior residual of the discrete Neumann solve.
    pub poisson_residual: f64,
    /// Conditions of order N >= 1 are out of scope and reported unchecked.
    pub higher_conditions: &'static str,
}

/// `u0 . grad u0` for `u0 = U + v0` with the constant background.
fn initial_advection(v0: &VectorField, background: BackgroundFlow) -> VectorField {
    let grid = v0.grid().clone();
    let (a, w) = background.velocity();
    let total = VectorField::from_components(&grid, &v0.c1 + a, &v0.c2 + w);
    v0.gradient().advected_by(&total)
}

/// Solve the initial-pressure Neumann problem
/// `Lap p0 = -div(u0 . grad u0)` with `grad p0 . n = [-u0 . grad u0] . n`
/// (the background is steady so its rate does not enter). Returns the
/// zero-mean solution.
pub fn solve_p0(v0: &VectorField, background: BackgroundFlow) -> Result<ScalarField> {
    let grid = v0.grid().clone();
    let adv = initial_advection(v0, background);
    let div = adv.divergence();
    let rhs = ScalarField::from_values(&grid, div.values.mapv(|x| -x));
    let top = grid.wall_row(Wall::Inflow);
    // grad p . n = -adv . n, written as the wall-normal derivative
    let bottom: Array1<f64> = (0..grid.n1).map(|i| -adv.c2[[i, 0]]).collect();
    let topv: Array1<f64> = (0..grid.n1).map(|i| -adv.c2[[i, top]]).collect();
    let bc = PoissonBc::Neumann { bottom, top: topv, compat_tol: 0.05 };
    let p = poisson::solve(&grid, &rhs.values, &bc)?;
    Ok(ScalarField::from_values(&grid, p))
}

fn interior_relative_residual(grid: &Arc<ChannelGrid>, p: &ScalarField, rhs: &ScalarField) -> f64 {
    let lap = poisson::laplacian_values(grid, &p.values);
    let mut diff = &lap - &rhs.values;
    let n = grid.x2.len();
    for i in 0..grid.n1 {
        diff[[i, 0]] = 0.0;
        diff[[i, n - 1]] = 0.0;
    }
    let denom = grid.l2_norm_values(&rhs.values).max(1e-300);
    grid.l2_norm_values(&diff) / denom
}

/// Evaluate the first two compatibility conditions for homogenized initial
/// data `v0` (so `u0 = U + v0`) and initial forcing `f0`.
pub fn check_compat(
    v0: &VectorField,
    f0: Option<&VectorField>,
    background: BackgroundFlow,
) -> Result<CompatReport> {
    let grid = v0.grid().clone();
    let top = grid.wall_row(Wall::Inflow);
    // cond_{-1}: tangential trace of u0 - U on the inflow wall is v0^1
    let cond_minus1_residual =
        (0..grid.n1).fold(0.0f64, |m, i| m.max(v0.c1[[i, top]].abs()));

    let adv = initial_advection(v0, background);
    let p0 = solve_p0(v0, background)?;
    let rhs = ScalarField::from_values(&grid, adv.divergence().values.mapv(|x| -x));
    let poisson_residual = interior_relative_residual(&grid, &p0, &rhs);

    let dp1 = grid.ddx1_values(&p0.values);
    let mut cond_0_residual: f64 = 0.0;
    for i in 0..grid.n1 {
        let f1 = f0.map_or(0.0, |f| f.c1[[i, top]]);
        let bracket1 = -adv.c1[[i, top]] - dp1[[i, top]] + f1;
        cond_0_residual = cond_0_residual.max(bracket1.abs());
    }
    Ok(CompatReport {
        p0,
        cond_minus1_residual,
        cond_0_residual,
        poisson_residual,
        higher_conditions: "unchecked (conditions of order 1 and higher are out of scope)",
    })
}

/// Forcing that repairs the second compatibility condition: `grad p0`
/// multiplied by a smooth profile that is identically 1 near the inflow wall
/// and 0 on the lower half of the channel. With data that matches the
/// background near the boundary this makes the condition hold exactly.
pub fn cond0_repair_forcing(v0: &VectorField, background: BackgroundFlow) -> Result<VectorField> {
    let grid = v0.grid().clone();
    let p0 = solve_p0(v0, background)?;
    let d1 = grid.ddx1_values(&p0.values);
    let d2 = grid.ddx2_values(&p0.values);
    let h = grid.geometry.height;
    let n = grid.x2.len();
    let mut f1 = d1;
    let mut f2 = d2;
    for j in 0..n {
        let s = smooth::step((grid.x2[j] - 0.5 * h) / (0.25 * h));
        for i in 0..grid.n1 {
            f1[[i, j]] *= s;
            f2[[i, j]] *= s;
        }
    }
    Ok(VectorField::from_components(&grid, f1, f2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::make_initial_data;
    use crate::grid::ChannelGeometry;

    fn grid(n1: usize, n2: usize, r: f64) -> Arc<ChannelGrid> {
        ChannelGrid::build(ChannelGeometry::new(1.0, 1.0).unwrap(), n1, n2, r).unwrap()
    }

    fn bg() -> BackgroundFlow {
        BackgroundFlow::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn background_only_data_is_fully_compatible() {
        let g = grid(16, 20, 1.1);
        let v0 = VectorField::zeros(&g);
        let report = check_compat(&v0, None, bg()).unwrap();
        assert!(report.p0.linf_norm() < 1e-12);
        assert_eq!(report.cond_minus1_residual, 0.0);
        assert!(report.cond_0_residual < 1e-12);
    }

    #[test]
    fn collar_data_compatibility_structure() {
        let g = grid(16, 32, 1.15);
        let v0 = make_initial_data(&g, 0.1, 1, 0.25).unwrap();
        let report = check_compat(&v0, None, bg()).unwrap();
        // lowest-order condition holds exactly for collar data
        assert_eq!(report.cond_minus1_residual, 0.0);
        assert!(report.poisson_residual <= 1e-10, "residual {}", report.poisson_residual);
        // the advection term vanishes in the collar, so the only surviving
        // piece of the bracket on the inflow wall is the pressure gradient
        let adv = initial_advection(&v0, bg());
        let top = g.wall_row(Wall::Inflow);
        for i in 0..g.n1 {
            assert_eq!(adv.c1[[i, top]], 0.0);
            assert_eq!(adv.c2[[i, top]], 0.0);
            assert_eq!(adv.c2[[i, 0]], 0.0);
        }
        let dp1 = g.ddx1_values(&report.p0.values);
        let want = (0..g.n1).fold(0.0f64, |m, i| m.max(dp1[[i, top]].abs()));
        assert!((report.cond_0_residual - want).abs() <= 1e-14 * want.max(1e-14));
    }

    #[test]
    fn gauge_shift_of_p0_does_not_change_residuals() {
        let g = grid(16, 32, 1.15);
        let v0 = make_initial_data(&g, 0.1, 1, 0.25).unwrap();
        let report = check_compat(&v0, None, bg()).unwrap();
        // only grad p0 enters: the tangential gradient of (p0 + const) is
        // identical, so recomputing the bracket with a shifted p0 agrees
        let shifted =
            ScalarField::from_values(&g, report.p0.values.mapv(|x| x + 5.0));
        let d_orig = g.ddx1_values(&report.p0.values);
        let d_shift = g.ddx1_values(&shifted.values);
        let top = g.wall_row(Wall::Inflow);
        for i in 0..g.n1 {
            assert!((d_orig[[i, top]] - d_shift[[i, top]]).abs() < 1e-12);
        }
    }

    #[test]
    fn cond_minus1_ignores_fields_supported_away_from_inflow() {
        let g = grid(16, 32, 1.15);
        let v0 = make_initial_data(&g, 0.1, 1, 0.25).unwrap();
        let bump = make_initial_data(&g, 0.3, 2, 0.3).unwrap();
        let sum = &v0 + &bump;
        let r1 = check_compat(&v0, None, bg()).unwrap().cond_minus1_residual;
        let r2 = check_compat(&sum, None, bg()).unwrap().cond_minus1_residual;
        assert_eq!(r1, r2);
    }

    #[test]
    fn repaired_forcing_closes_cond0() {
        let g = grid(16, 32, 1.15);
        let v0 = make_initial_data(&g, 0.1, 1, 0.25).unwrap();
        let f0 = cond0_repair_forcing(&v0, bg()).unwrap();
        let report = check_compat(&v0, Some(&f0), bg()).unwrap();
        assert!(
            report.cond_0_residual <= 1e-8 * report.p0.linf_norm().max(1e-8),
            "cond_0 residual {}",
            report.cond_0_residual
        );
    }

    #[test]
    fn p0_matches_dense_oracle_at_coarse_resolution() {
        use nalgebra::{DMatrix, DVector};
        let n1 = 8usize;
        let n2 = 14usize;
        let g = grid(n1, n2, 1.2);
        let v0 = make_initial_data(&g, 0.15, 1, 0.25).unwrap();
        let p_fast = solve_p0(&v0, bg()).unwrap();
        // independent dense path per Fourier mode: stencil weights derived by
        // solving Vandermonde systems instead of the closed Lagrange forms
        let adv = initial_advection(&v0, bg());
        let rhs_field = adv.divergence().values.mapv(|x| -x);
        let rhs_modes = g.to_modes(&rhs_field);
        let mut bottom = ndarray::Array2::zeros((n1, 1));
        let mut top = ndarray::Array2::zeros((n1, 1));
        let jt = g.wall_row(Wall::Inflow);
        for i in 0..n1 {
            bottom[[i, 0]] = -adv.c2[[i, 0]];
            top[[i, 0]] = -adv.c2[[i, jt]];
        }
        let bmodes = g.to_modes(&bottom);
        let tmodes = g.to_modes(&top);
        let n = n2 + 1;
        let second_weights = |js: &[usize], at: usize| -> Vec<f64> {
            // solve V^T w = d where d_k = (x^k)'' at x2[at]
            let m = js.len();
            let x0 = g.x2[at];
            let mut vt = DMatrix::zeros(m, m);
            let mut d = DVector::zeros(m);
            for k in 0..m {
                for (c, &j) in js.iter().enumerate() {
                    vt[(k, c)] = (g.x2[j] - x0).powi(k as i32);
                }
                d[k] = if k == 2 { 2.0 } else { 0.0 };
            }
            vt.lu().solve(&d).unwrap().iter().cloned().collect()
        };
        let first_weights = |js: &[usize], at: usize| -> Vec<f64> {
            let m = js.len();
            let x0 = g.x2[at];
            let mut vt = DMatrix::zeros(m, m);
            let mut d = DVector::zeros(m);
            for k in 0..m {
                for (c, &j) in js.iter().enumerate() {
                    vt[(k, c)] = (g.x2[j] - x0).powi(k as i32);
                }
                d[k] = if k == 1 { 1.0 } else { 0.0 };
            }
            vt.lu().solve(&d).unwrap().iter().cloned().collect()
        };
        let mut sol_modes: ndarray::Array2<rustfft::num_complex::Complex<f64>> =
            ndarray::Array2::zeros((n1, n));
        for m in 0..n1 {
            let ki = m.min(n1 - m);
            let k = 2.0 * std::f64::consts::PI * ki as f64;
            let mut a = DMatrix::<f64>::zeros(n, n);
            for j in 1..n - 1 {
                let js = [j - 1, j, j + 1];
                let w = second_weights(&js, j);
                for (c, &jj) in js.iter().enumerate() {
                    a[(j, jj)] += w[c];
                }
                a[(j, j)] -= k * k;
            }
            let singular = ki == 0;
            if singular {
                a[(0, 0)] = 1.0;
            } else {
                let js: Vec<usize> = (0..4).collect();
                let w = first_weights(&js, 0);
                for (c, &jj) in js.iter().enumerate() {
                    a[(0, jj)] = w[c];
                }
            }
            let js: Vec<usize> = (n - 4..n).collect();
            let w = first_weights(&js, n - 1);
            for (c, &jj) in js.iter().enumerate() {
                a[(n - 1, jj)] = w[c];
            }
            let lu = a.lu();
            for part in 0..2 {
                let mut b = DVector::zeros(n);
                for j in 1..n - 1 {
                    b[j] = if part == 0 { rhs_modes[[m, j]].re } else { rhs_modes[[m, j]].im };
                }
                b[0] = if singular {
                    0.0
                } else if part == 0 {
                    bmodes[[m, 0]].re
                } else {
                    bmodes[[m, 0]].im
                };
                b[n - 1] = if part == 0 { tmodes[[m, 0]].re } else { tmodes[[m, 0]].im };
                let x = lu.solve(&b).unwrap();
                for j in 0..n {
                    if part == 0 {
                        sol_modes[[m, j]].re = x[j];
                    } else {
                        sol_modes[[m, j]].im = x[j];
                    }
                }
            }
        }
        let mut p_dense = g.from_modes(&sol_modes);
        let mean = g.integrate_values(&p_dense);
        p_dense.mapv_inplace(|x| x - mean);
        let scale = p_fast.linf_norm().max(1e-12);
        let diff = (&p_fast.values - &p_dense).iter().fold(0.0f64, |mx, v| mx.max(v.abs()));
        assert!(diff <= 1e-8 * scale, "dense oracle mismatch {diff:.3e} (scale {scale:.3e})");
    }
}
