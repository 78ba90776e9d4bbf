//! Pressure solves: per-x1-wavenumber banded systems in the wall-normal
//! direction, plus the discrete Leray projection built from the same
//! first-derivative operator as the divergence monitor.
//!
//! The projection solves, for each Fourier mode, the composed system
//! `(Dz Z Dz - k^2 diag(free)) q = i k free v1 + Dz Z v2`, where `Dz` is the
//! collocation first-derivative matrix and `Z` zeroes the wall rows of the
//! corrected normal velocity. Because the corrected field is assembled from
//! exactly the operators appearing in these equations, its monitored
//! divergence is the linear-solver residual, and the wall rows carry exact
//! zeros for every pinned component.

use ndarray::{Array1, Array2};
use rustfft::num_complex::Complex;

use crate::error::{ChannelError, Result};
use crate::grid::ChannelGrid;
use crate::linalg::{Banded, BandedLu};

/// Boundary data for `solve`: one value per x1 node at each wall.
#[derive(Debug, Clone)]
pub enum PoissonBc {
    /// Prescribed wall-normal derivative `d p / d x2` at x2 = 0 and x2 = h.
    Neumann { bottom: Array1<f64>, top: Array1<f64>, compat_tol: f64 },
    Dirichlet { bottom: Array1<f64>, top: Array1<f64> },
}

impl PoissonBc {
    pub fn homogeneous_neumann(grid: &ChannelGrid) -> Self {
        PoissonBc::Neumann {
            bottom: Array1::zeros(grid.n1),
            top: Array1::zeros(grid.n1),
            compat_tol: 0.02,
        }
    }
}

/// Derivative of the Lagrange interpolant through `xs`, evaluated at `at`.
fn lagrange_deriv_weights(xs: &[f64], at: f64) -> Vec<f64> {
    let n = xs.len();
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut denom = 1.0;
        for j in 0..n {
            if j != i {
                denom *= xs[i] - xs[j];
            }
        }
        let mut num = 0.0;
        for m in 0..n {
            if m == i {
                continue;
            }
            let mut prod = 1.0;
            for j in 0..n {
                if j != i && j != m {
                    prod *= at - xs[j];
                }
            }
            num += prod;
        }
        w[i] = num / denom;
    }
    w
}

fn trace_modes(grid: &ChannelGrid, row: &Array1<f64>) -> Vec<Complex<f64>> {
    let mut field = Array2::zeros((grid.n1, 1));
    for i in 0..grid.n1 {
        field[[i, 0]] = row[i];
    }
    let m = grid.to_modes(&field);
    (0..grid.n1).map(|i| m[[i, 0]]).collect()
}

/// Spectral-in-x1, 3-point-in-x2 Laplacian. Matches the operator inverted by
/// `solve` on the interior collocation rows.
pub fn laplacian_values(grid: &ChannelGrid, f: &Array2<f64>) -> Array2<f64> {
    let mut modes = grid.to_modes(f);
    for i in 0..grid.n1 {
        let k2 = grid.k1[i] * grid.k1[i];
        for j in 0..modes.ncols() {
            modes[[i, j]] *= -k2;
        }
    }
    let horizontal = grid.from_modes(&modes);
    horizontal + grid.d2dx2_values(f)
}

fn assemble_mode_matrix(grid: &ChannelGrid, k2: f64, bc: &PoissonBc) -> Banded {
    let n = grid.x2.len();
    let mut a = Banded::zeros(n, 3, 3);
    let d2 = grid.d2_stencils();
    for j in 1..n - 1 {
        let s = &d2[j];
        for (idx, &c) in s.nodes.iter().enumerate() {
            a.add(j, c, s.w[idx]);
        }
        a.add(j, j, -k2);
    }
    match bc {
        PoissonBc::Dirichlet { .. } => {
            a.set(0, 0, 1.0);
            a.set(n - 1, n - 1, 1.0);
        }
        PoissonBc::Neumann { .. } => {
            // one order above the interior stencil so the boundary closure
            // does not dominate the elliptic error
            let m = 4.min(n);
            let xs0: Vec<f64> = (0..m).map(|j| grid.x2[j]).collect();
            for (idx, w) in lagrange_deriv_weights(&xs0, grid.x2[0]).iter().enumerate() {
                a.add(0, idx, *w);
            }
            let xst: Vec<f64> = (n - m..n).map(|j| grid.x2[j]).collect();
            for (idx, w) in lagrange_deriv_weights(&xst, grid.x2[n - 1]).iter().enumerate() {
                a.add(n - 1, n - m + idx, *w);
            }
        }
    }
    a
}

/// Solve `Laplacian p = rhs` with the given wall conditions. Neumann
/// solutions come back with zero quadrature mean; the singular k = 0 Neumann
/// block is handled by pinning one node and restoring the gauge afterwards.
pub fn solve(grid: &ChannelGrid, rhs: &Array2<f64>, bc: &PoissonBc) -> Result<Array2<f64>> {
    let n = grid.x2.len();
    let n1 = grid.n1;
    assert_eq!(rhs.dim(), (n1, n));

    if let PoissonBc::Neumann { bottom, top, compat_tol } = bc {
        // solvability: integral of rhs must equal the boundary flux
        let vol = grid.integrate_values(rhs);
        let flux = grid.integrate_wall(top) - grid.integrate_wall(bottom);
        let scale = grid.l2_norm_values(rhs)
            * (grid.geometry.length * grid.geometry.height).sqrt()
            + flux.abs();
        let defect = (vol - flux).abs();
        if defect > compat_tol * scale.max(1e-14) {
            return Err(ChannelError::IncompatibleNeumann { defect, tol: *compat_tol, scale });
        }
    }

    let rhs_modes = grid.to_modes(rhs);
    let (bottom_modes, top_modes) = match bc {
        PoissonBc::Neumann { bottom, top, .. } | PoissonBc::Dirichlet { bottom, top } => {
            (trace_modes(grid, bottom), trace_modes(grid, top))
        }
    };
    let neumann = matches!(bc, PoissonBc::Neumann { .. });

    let mut sol_modes: Array2<Complex<f64>> = Array2::zeros((n1, n));
    // modes i and n1 - i share |k|; factor each distinct k once
    let mut lus: Vec<Option<BandedLu>> = (0..=n1 / 2).map(|_| None).collect();
    for i in 0..n1 {
        let ki = i.min(n1 - i);
        let k2 = grid.k1[ki] * grid.k1[ki];
        let singular = neumann && ki == 0;
        if lus[ki].is_none() {
            let mut a = assemble_mode_matrix(grid, k2, bc);
            if singular {
                // pin the bottom node; the dropped Neumann row is implied by
                // solvability and is checked by the caller-visible residual
                for c in 0..4.min(n) {
                    a.set(0, c, if c == 0 { 1.0 } else { 0.0 });
                }
            }
            lus[ki] = Some(a.factor()?);
        }
        let lu = lus[ki].as_ref().unwrap();
        let mut bre = vec![0.0; n];
        let mut bim = vec![0.0; n];
        for j in 1..n - 1 {
            bre[j] = rhs_modes[[i, j]].re;
            bim[j] = rhs_modes[[i, j]].im;
        }
        let (b0, bt) = (bottom_modes[i], top_modes[i]);
        if singular {
            bre[0] = 0.0;
            bim[0] = 0.0;
        } else {
            bre[0] = b0.re;
            bim[0] = b0.im;
        }
        bre[n - 1] = bt.re;
        bim[n - 1] = bt.im;
        lu.solve_in_place(&mut bre);
        lu.solve_in_place(&mut bim);
        for j in 0..n {
            sol_modes[[i, j]] = Complex::new(bre[j], bim[j]);
        }
    }
    let mut p = grid.from_modes(&sol_modes);
    if neumann {
        let mean = grid.integrate_values(&p) / (grid.geometry.length * grid.geometry.height);
        p.mapv_inplace(|v| v - mean);
    }
    Ok(p)
}

/// How the projection treats a wall.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WallBc {
    /// Both velocity components pinned to zero (no-slip / inflow wall).
    FullDirichlet,
    /// Only the normal component pinned; the tangential component is free and
    /// receives the tangential gradient correction.
    NoPenetration,
}

/// Discrete Leray projector with per-mode factorizations cached.
///
/// The `k = 0` mode needs no solve: periodicity makes the mean tangential
/// slice divergence-free on its own, and the mean vertical flux vanishes
/// between impermeable walls, so the exact correction zeroes the mean
/// vertical component and leaves the mean tangential component alone.
pub struct LerayProjector {
    n: usize,
    n1: usize,
    bottom: WallBc,
    top: WallBc,
    /// Factorizations for modes `1..=n1/2`; index `ki - 1`.
    lus: Vec<BandedLu>,
    k_eff: Vec<f64>,
    d1_rows: Vec<crate::grid::Stencil3>,
}

impl LerayProjector {
    pub fn new(grid: &ChannelGrid, bottom: WallBc, top: WallBc) -> Result<Self> {
        let n = grid.x2.len();
        let n1 = grid.n1;
        let d1 = grid.d1_stencils().to_vec();
        let free = |j: usize| -> bool {
            if j == 0 {
                bottom == WallBc::NoPenetration
            } else if j == n - 1 {
                top == WallBc::NoPenetration
            } else {
                true
            }
        };
        let mut lus = Vec::with_capacity(n1 / 2);
        for ki in 1..=n1 / 2 {
            let k2 = grid.k1[ki] * grid.k1[ki];
            let mut a = Banded::zeros(n, 3, 3);
            // composed operator Dz Z Dz - k^2 diag(free)
            for j in 0..n {
                let sj = &d1[j];
                for (idx, &m) in sj.nodes.iter().enumerate() {
                    if m == 0 || m == n - 1 {
                        continue; // Z: corrected normal velocity is pinned at walls
                    }
                    let coeff = sj.w[idx];
                    let sm = &d1[m];
                    for (ic, &c) in sm.nodes.iter().enumerate() {
                        a.add(j, c, coeff * sm.w[ic]);
                    }
                }
                if free(j) {
                    a.add(j, j, -k2);
                }
            }
            lus.push(a.factor().map_err(|e| {
                ChannelError::SingularSystem(format!("projection mode {ki}: {e}"))
            })?);
        }
        let k_eff = grid.k1.clone();
        Ok(Self { n, n1, bottom, top, lus, k_eff, d1_rows: d1 })
    }

    fn free(&self, j: usize) -> bool {
        if j == 0 {
            self.bottom == WallBc::NoPenetration
        } else if j == self.n - 1 {
            self.top == WallBc::NoPenetration
        } else {
            true
        }
    }

    /// Project raw component arrays; returns the corrected pair.
    pub fn project_values(
        &self,
        grid: &ChannelGrid,
        v1: &Array2<f64>,
        v2: &Array2<f64>,
    ) -> (Array2<f64>, Array2<f64>) {
        let n = self.n;
        let n1 = self.n1;
        let mut m1 = grid.to_modes(v1);
        let mut m2 = grid.to_modes(v2);
        let mut q = vec![Complex::new(0.0, 0.0); n];
        for i in 0..n1 {
            let ki = i.min(n1 - i);
            if ki == 0 {
                // exact mean-mode projection: no net vertical flux between
                // impermeable walls, mean tangential slice untouched
                for j in 0..n {
                    m2[[i, j]] = Complex::new(0.0, 0.0);
                    if !self.free(j) {
                        m1[[i, j]] = Complex::new(0.0, 0.0);
                    }
                }
                continue;
            }
            let k = self.k_eff[i];
            let lu = &self.lus[ki - 1];
            // rhs = i k free v1 + Dz Z v2
            let mut bre = vec![0.0; n];
            let mut bim = vec![0.0; n];
            for j in 0..n {
                let mut acc = Complex::new(0.0, 0.0);
                if self.free(j) {
                    acc += Complex::new(0.0, k) * m1[[i, j]];
                }
                let s = &self.d1_rows[j];
                for (idx, &c) in s.nodes.iter().enumerate() {
                    if c == 0 || c == n - 1 {
                        continue;
                    }
                    acc += s.w[idx] * m2[[i, c]];
                }
                bre[j] = acc.re;
                bim[j] = acc.im;
            }
            lu.solve_in_place(&mut bre);
            lu.solve_in_place(&mut bim);
            for j in 0..n {
                q[j] = Complex::new(bre[j], bim[j]);
            }
            // corrections
            for j in 0..n {
                if self.free(j) {
                    m1[[i, j]] -= Complex::new(0.0, k) * q[j];
                } else {
                    m1[[i, j]] = Complex::new(0.0, 0.0);
                }
            }
            let mut dq = vec![Complex::new(0.0, 0.0); n];
            for j in 1..n - 1 {
                let s = &self.d1_rows[j];
                let mut acc = Complex::new(0.0, 0.0);
                for (idx, &c) in s.nodes.iter().enumerate() {
                    acc += s.w[idx] * q[c];
                }
                dq[j] = acc;
            }
            for j in 0..n {
                if j == 0 || j == n - 1 {
                    m2[[i, j]] = Complex::new(0.0, 0.0);
                } else {
                    m2[[i, j]] -= dq[j];
                }
            }
        }
        (grid.from_modes(&m1), grid.from_modes(&m2))
    }
}
