//! Discrete periodic channel: Fourier collocation in the periodic direction,
//! second-order finite differences on a geometrically graded wall-normal mesh.
//!
//! The channel is `[0, L] x [0, h]`, periodic in `x1`. The outflow wall sits
//! at `x2 = 0` and the inflow wall at `x2 = h`; grading refines toward the
//! outflow wall where the `exp(-U x2 / nu)` layer lives. All operators are
//! pure functions of the stored mesh, so a grid can be shared freely behind
//! an `Arc`.

use std::sync::Arc;

use ndarray::{Array1, Array2};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{ChannelError, Result};

/// Channel geometry: period `length` in x1, wall separation `height` in x2.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ChannelGeometry {
    pub length: f64,
    pub height: f64,
}

impl ChannelGeometry {
    pub fn new(length: f64, height: f64) -> Result<Self> {
        if !(length > 0.0) || !(height > 0.0) {
            return Err(ChannelError::InvalidGrid(format!(
                "geometry must be positive, got L={length}, h={height}"
            )));
        }
        Ok(Self { length, height })
    }
}

/// Constant background flow `(a, -u)` with `u > 0`: inflow through the top
/// wall, outflow through the bottom wall.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BackgroundFlow {
    pub a: f64,
    pub u: f64,
}

impl BackgroundFlow {
    pub fn new(a: f64, u: f64) -> Result<Self> {
        if !(u > 0.0) {
            return Err(ChannelError::InvalidInput(format!(
                "vertical background speed must be strictly positive, got {u}"
            )));
        }
        Ok(Self { a, u })
    }

    /// Velocity components of the background field.
    pub fn velocity(&self) -> (f64, f64) {
        (self.a, -self.u)
    }
}

/// Which wall a trace or boundary condition refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Wall {
    /// Outflow boundary, x2 = 0.
    Outflow,
    /// Inflow boundary, x2 = h.
    Inflow,
}

/// 3-point stencil: node indices and weights.
#[derive(Debug, Clone, Copy)]
pub struct Stencil3 {
    pub nodes: [usize; 3],
    pub w: [f64; 3],
}

fn lagrange_first_weights(x: [f64; 3], at: f64) -> [f64; 3] {
    let d01 = x[0] - x[1];
    let d02 = x[0] - x[2];
    let d12 = x[1] - x[2];
    [
        (2.0 * at - x[1] - x[2]) / (d01 * d02),
        (2.0 * at - x[0] - x[2]) / (-d01 * d12),
        (2.0 * at - x[0] - x[1]) / (d02 * d12),
    ]
}

fn lagrange_second_weights(x: [f64; 3]) -> [f64; 3] {
    let d01 = x[0] - x[1];
    let d02 = x[0] - x[2];
    let d12 = x[1] - x[2];
    [2.0 / (d01 * d02), 2.0 / (-d01 * d12), 2.0 / (d02 * d12)]
}

/// Discrete channel grid. Immutable after construction.
pub struct ChannelGrid {
    pub geometry: ChannelGeometry,
    pub n1: usize,
    /// Wall-normal nodes, `x2[0] = 0`, `x2[n2] = h`, strictly increasing.
    pub x2: Array1<f64>,
    /// Periodic x1 nodes (no duplicated seam column).
    pub x1: Array1<f64>,
    pub grading_ratio: f64,
    pub dx1: f64,
    /// Trapezoid weights over x2.
    pub wt_x2: Array1<f64>,
    /// Signed physical wavenumber per FFT mode index (Nyquist included).
    pub k1: Vec<f64>,
    d1: Vec<Stencil3>,
    d2: Vec<Stencil3>,
    /// First derivative biased toward larger x2 (for downward transport).
    d1_from_above: Vec<Stencil3>,
    /// First derivative biased toward smaller x2 (for upward transport).
    d1_from_below: Vec<Stencil3>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// Largest retained |mode index| under the 2/3 rule.
    pub dealias_keep: usize,
}

impl std::fmt::Debug for ChannelGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChannelGrid")
            .field("geometry", &self.geometry)
            .field("n1", &self.n1)
            .field("n2", &(self.x2.len() - 1))
            .field("grading_ratio", &self.grading_ratio)
            .finish()
    }
}

impl ChannelGrid {
    /// Build a grid with `n2 + 1` wall-normal nodes, geometrically graded so
    /// the smallest cell is adjacent to `x2 = 0`; uniform when
    /// `grading_ratio = 1`. The first gap is `h (r - 1) / (r^n2 - 1)`.
    pub fn build(
        geometry: ChannelGeometry,
        n1: usize,
        n2: usize,
        grading_ratio: f64,
    ) -> Result<Arc<Self>> {
        if n1 < 4 || n1 % 2 != 0 {
            return Err(ChannelError::InvalidGrid(format!(
                "n1 must be an even integer >= 4, got {n1}"
            )));
        }
        if n2 < 8 {
            return Err(ChannelError::InvalidGrid(format!("n2 must be >= 8, got {n2}")));
        }
        if !(grading_ratio >= 1.0) {
            return Err(ChannelError::InvalidGrid(format!(
                "grading_ratio must be >= 1, got {grading_ratio}"
            )));
        }
        let h = geometry.height;
        let r = grading_ratio;
        let delta0 = if r == 1.0 { h / n2 as f64 } else { h * (r - 1.0) / (r.powi(n2 as i32) - 1.0) };
        let mut x2 = Array1::zeros(n2 + 1);
        let mut gap = delta0;
        for j in 0..n2 {
            x2[j + 1] = x2[j] + gap;
            gap *= r;
        }
        x2[n2] = h; // pin the last node exactly

        let dx1 = geometry.length / n1 as f64;
        let x1 = Array1::from_iter((0..n1).map(|i| i as f64 * dx1));

        let mut wt_x2 = Array1::zeros(n2 + 1);
        for j in 0..n2 {
            let half = 0.5 * (x2[j + 1] - x2[j]);
            wt_x2[j] += half;
            wt_x2[j + 1] += half;
        }

        let nodes_of = |j: usize| -> [usize; 3] {
            if j == 0 {
                [0, 1, 2]
            } else if j == n2 {
                [n2 - 2, n2 - 1, n2]
            } else {
                [j - 1, j, j + 1]
            }
        };
        let mut d1 = Vec::with_capacity(n2 + 1);
        let mut d2 = Vec::with_capacity(n2 + 1);
        for j in 0..=n2 {
            let nodes = nodes_of(j);
            let xs = [x2[nodes[0]], x2[nodes[1]], x2[nodes[2]]];
            d1.push(Stencil3 { nodes, w: lagrange_first_weights(xs, x2[j]) });
            d2.push(Stencil3 { nodes, w: lagrange_second_weights(xs) });
        }
        let biased = |j: usize, from_above: bool| -> Stencil3 {
            let nodes = if from_above {
                if j + 2 <= n2 {
                    [j, j + 1, j + 2]
                } else {
                    nodes_of(j)
                }
            } else if j >= 2 {
                [j - 2, j - 1, j]
            } else {
                nodes_of(j)
            };
            let xs = [x2[nodes[0]], x2[nodes[1]], x2[nodes[2]]];
            Stencil3 { nodes, w: lagrange_first_weights(xs, x2[j]) }
        };
        let d1_from_above = (0..=n2).map(|j| biased(j, true)).collect();
        let d1_from_below = (0..=n2).map(|j| biased(j, false)).collect();

        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n1);
        let inv = planner.plan_fft_inverse(n1);
        let two_pi_over_l = 2.0 * std::f64::consts::PI / geometry.length;
        let k1 = (0..n1)
            .map(|i| {
                let m = if i <= n1 / 2 { i as i64 } else { i as i64 - n1 as i64 };
                m as f64 * two_pi_over_l
            })
            .collect();

        Ok(Arc::new(Self {
            geometry,
            n1,
            x2,
            x1,
            grading_ratio,
            dx1,
            wt_x2,
            k1,
            d1,
            d2,
            d1_from_above,
            d1_from_below,
            fwd,
            inv,
            dealias_keep: n1 / 3,
        }))
    }

    /// Choose `(n2, grading_ratio)` so the layer at the outflow wall is
    /// resolved: first cell `<= layer_width / safety`, at least six nodes
    /// inside `3 * layer_width`, largest cell `<= max_spacing`.
    pub fn for_boundary_layer(
        geometry: ChannelGeometry,
        n1: usize,
        layer_width: f64,
        safety: f64,
        max_spacing: f64,
    ) -> Result<Arc<Self>> {
        if !(layer_width > 0.0) || !(safety > 0.0) {
            return Err(ChannelError::InvalidGrid("layer width and safety must be positive".into()));
        }
        let h = geometry.height;
        let mut target = (layer_width / safety).min(h / 8.0);
        for _ in 0..8 {
            // largest admissible ratio first: fewest nodes wins
            let mut r = 1.15;
            while r >= 1.004 {
                let n2 = ((1.0 + h * (r - 1.0) / target).ln() / r.ln()).ceil() as usize;
                let n2 = n2.max(8);
                let grid = Self::build(geometry, n1, n2, r)?;
                let gaps = grid.spacings();
                let last = gaps[gaps.len() - 1];
                let first = gaps[0];
                let inside = grid.x2.iter().filter(|&&x| x <= 3.0 * layer_width).count();
                if first <= target * (1.0 + 1e-12) && last <= max_spacing && inside >= 6 {
                    return Ok(grid);
                }
                r -= 0.005;
            }
            target *= 0.7;
        }
        Err(ChannelError::InvalidGrid(format!(
            "no graded mesh found for layer width {layer_width:.3e} (safety {safety})"
        )))
    }

    /// A mesh with the same stretching map and doubled resolution: node count
    /// doubles, node-to-node ratio becomes sqrt(r), and every coarse node is
    /// retained. Used by the refinement gate.
    pub fn refined(&self) -> Result<Arc<Self>> {
        let n2 = self.n2();
        ChannelGrid::build(self.geometry, self.n1, 2 * n2, self.grading_ratio.sqrt())
    }

    pub fn n2(&self) -> usize {
        self.x2.len() - 1
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n1, self.x2.len())
    }

    pub fn spacings(&self) -> Vec<f64> {
        (0..self.n2()).map(|j| self.x2[j + 1] - self.x2[j]).collect()
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacings().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_spacing(&self) -> f64 {
        self.spacings().iter().cloned().fold(0.0, f64::max)
    }

    pub fn same_mesh(&self, other: &Self) -> bool {
        self.geometry == other.geometry && self.n1 == other.n1 && self.x2 == other.x2
    }

    pub fn wall_row(&self, wall: Wall) -> usize {
        match wall {
            Wall::Outflow => 0,
            Wall::Inflow => self.n2(),
        }
    }

    // ---- spectral machinery along x1 ----

    pub fn to_modes(&self, values: &Array2<f64>) -> Array2<Complex<f64>> {
        let (n1, ncols) = (self.n1, values.ncols());
        let mut modes = Array2::zeros((n1, ncols));
        let mut buf = vec![Complex::new(0.0, 0.0); n1];
        for j in 0..ncols {
            for i in 0..n1 {
                buf[i] = Complex::new(values[[i, j]], 0.0);
            }
            self.fwd.process(&mut buf);
            for i in 0..n1 {
                modes[[i, j]] = buf[i];
            }
        }
        modes
    }

    pub fn from_modes(&self, modes: &Array2<Complex<f64>>) -> Array2<f64> {
        let (n1, ncols) = (self.n1, modes.ncols());
        let scale = 1.0 / n1 as f64;
        let mut values = Array2::zeros((n1, ncols));
        let mut buf = vec![Complex::new(0.0, 0.0); n1];
        for j in 0..ncols {
            for i in 0..n1 {
                buf[i] = modes[[i, j]];
            }
            self.inv.process(&mut buf);
            for i in 0..n1 {
                values[[i, j]] = buf[i].re * scale;
            }
        }
        values
    }

    /// Spectral derivative along the periodic direction; Nyquist mode dropped.
    pub fn ddx1_values(&self, values: &Array2<f64>) -> Array2<f64> {
        let mut modes = self.to_modes(values);
        let nyquist = self.n1 / 2;
        for i in 0..self.n1 {
            let f = if i == nyquist {
                Complex::new(0.0, 0.0)
            } else {
                Complex::new(0.0, self.k1[i])
            };
            for j in 0..modes.ncols() {
                modes[[i, j]] *= f;
            }
        }
        self.from_modes(&modes)
    }

    /// 2/3-rule truncation: zero every mode with |index| above `n1 / 3`.
    pub fn dealias_values(&self, values: &Array2<f64>) -> Array2<f64> {
        let mut modes = self.to_modes(values);
        for i in 0..self.n1 {
            let idx = i.min(self.n1 - i);
            if idx > self.dealias_keep {
                for j in 0..modes.ncols() {
                    modes[[i, j]] = Complex::new(0.0, 0.0);
                }
            }
        }
        self.from_modes(&modes)
    }

    /// Spectral derivative of a single periodic row of samples.
    pub fn trace_ddx1(&self, trace: &Array1<f64>) -> Array1<f64> {
        let n1 = self.n1;
        assert_eq!(trace.len(), n1);
        let mut buf: Vec<Complex<f64>> =
            trace.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.fwd.process(&mut buf);
        let nyquist = n1 / 2;
        for i in 0..n1 {
            let f = if i == nyquist {
                Complex::new(0.0, 0.0)
            } else {
                Complex::new(0.0, self.k1[i])
            };
            buf[i] *= f;
        }
        self.inv.process(&mut buf);
        let scale = 1.0 / n1 as f64;
        Array1::from_iter(buf.iter().map(|c| c.re * scale))
    }

    // ---- wall-normal finite differences ----

    /// First derivative in x2: centered 3-point stencils at interior nodes,
    /// second-order one-sided stencils at the walls.
    pub fn ddx2_values(&self, values: &Array2<f64>) -> Array2<f64> {
        self.apply_stencils(values, &self.d1)
    }

    /// Second derivative in x2 (3-point, exact on quadratics).
    pub fn d2dx2_values(&self, values: &Array2<f64>) -> Array2<f64> {
        self.apply_stencils(values, &self.d2)
    }

    fn apply_stencils(&self, values: &Array2<f64>, st: &[Stencil3]) -> Array2<f64> {
        let (n1, ncols) = (self.n1, values.ncols());
        assert_eq!(ncols, st.len());
        let mut out = Array2::zeros((n1, ncols));
        for j in 0..ncols {
            let s = &st[j];
            for i in 0..n1 {
                out[[i, j]] = s.w[0] * values[[i, s.nodes[0]]]
                    + s.w[1] * values[[i, s.nodes[1]]]
                    + s.w[2] * values[[i, s.nodes[2]]];
            }
        }
        out
    }

    /// Stencil table for the first derivative (used by the Poisson and
    /// projection system assembly).
    pub fn d1_stencils(&self) -> &[Stencil3] {
        &self.d1
    }

    pub fn d2_stencils(&self) -> &[Stencil3] {
        &self.d2
    }

    /// Upwind-biased wall-normal derivative: at each node the stencil leans
    /// against the local transport direction given by `speed` (negative
    /// vertical speed pulls information from above). Second order; exact on
    /// quadratics like the centered table.
    pub fn ddx2_upwind(&self, values: &Array2<f64>, speed: &Array2<f64>) -> Array2<f64> {
        let (n1, ncols) = (self.n1, values.ncols());
        let mut out = Array2::zeros((n1, ncols));
        for j in 0..ncols {
            for i in 0..n1 {
                let s = if speed[[i, j]] < 0.0 {
                    &self.d1_from_above[j]
                } else if speed[[i, j]] > 0.0 {
                    &self.d1_from_below[j]
                } else {
                    &self.d1[j]
                };
                out[[i, j]] = s.w[0] * values[[i, s.nodes[0]]]
                    + s.w[1] * values[[i, s.nodes[1]]]
                    + s.w[2] * values[[i, s.nodes[2]]];
            }
        }
        out
    }

    // ---- quadrature ----

    /// Trapezoidal-in-x2, uniform-in-x1 integral over the channel.
    pub fn integrate_values(&self, values: &Array2<f64>) -> f64 {
        let mut acc = 0.0;
        for j in 0..values.ncols() {
            let w = self.wt_x2[j];
            let mut col = 0.0;
            for i in 0..self.n1 {
                col += values[[i, j]];
            }
            acc += w * col;
        }
        acc * self.dx1
    }

    pub fn l2_norm_values(&self, values: &Array2<f64>) -> f64 {
        let mut acc = 0.0;
        for j in 0..values.ncols() {
            let w = self.wt_x2[j];
            let mut col = 0.0;
            for i in 0..self.n1 {
                let v = values[[i, j]];
                col += v * v;
            }
            acc += w * col;
        }
        (acc * self.dx1).sqrt()
    }

    /// Integral over one wall (line integral in x1 at fixed x2).
    pub fn integrate_wall(&self, row: &Array1<f64>) -> f64 {
        row.sum() * self.dx1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n1: usize, n2: usize, r: f64) -> Arc<ChannelGrid> {
        let geom = ChannelGeometry::new(1.0, 1.0).unwrap();
        ChannelGrid::build(geom, n1, n2, r).unwrap()
    }

    #[test]
    fn uniform_grading_gives_uniform_nodes() {
        let g = grid(8, 8, 1.0);
        for j in 0..=8 {
            assert!((g.x2[j] - j as f64 * 0.125).abs() < 1e-15);
        }
    }

    #[test]
    fn geometric_first_gap_matches_series_formula() {
        let g = grid(8, 8, 2.0);
        // h (r - 1) / (r^n2 - 1) = 1 / 255, checked by summation
        let first = g.x2[1] - g.x2[0];
        assert!((first - 1.0 / 255.0).abs() < 1e-15);
        let mut sum = 0.0;
        let mut gap = first;
        for _ in 0..8 {
            sum += gap;
            gap *= 2.0;
        }
        assert!((sum - 1.0).abs() < 1e-12);
        assert_eq!(g.x2[0], 0.0);
        assert_eq!(g.x2[8], 1.0);
        // spacing doubles node to node
        let gaps = g.spacings();
        for j in 1..8 {
            assert!((gaps[j] / gaps[j - 1] - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn odd_n1_rejected() {
        let geom = ChannelGeometry::new(1.0, 1.0).unwrap();
        assert!(ChannelGrid::build(geom, 7, 8, 1.0).is_err());
        assert!(ChannelGrid::build(geom, 8, 8, 0.5).is_err());
        assert!(ChannelGrid::build(geom, 2, 8, 1.0).is_err());
    }

    #[test]
    fn ddx1_single_mode_exact() {
        let g = grid(16, 8, 1.0);
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut f = Array2::zeros((16, 9));
        for i in 0..16 {
            for j in 0..9 {
                f[[i, j]] = (two_pi * g.x1[i]).sin();
            }
        }
        let df = g.ddx1_values(&f);
        for i in 0..16 {
            for j in 0..9 {
                let want = two_pi * (two_pi * g.x1[i]).cos();
                assert!((df[[i, j]] - want).abs() < 1e-12, "i={i}");
            }
        }
        // constant differentiates to zero
        let c = Array2::from_elem((16, 9), 1.0);
        let dc = g.ddx1_values(&c);
        assert!(dc.iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn ddx1_squared_mode_uses_trig_identity() {
        let g = grid(16, 8, 1.0);
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut f = Array2::zeros((16, 9));
        for i in 0..16 {
            let s = (two_pi * g.x1[i]).sin();
            for j in 0..9 {
                f[[i, j]] = s * s;
            }
        }
        let df = g.ddx1_values(&f);
        for i in 0..16 {
            let want = two_pi * (2.0 * two_pi * g.x1[i]).sin();
            assert!((df[[i, 0]] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn ddx2_exact_on_linear_and_quadratic() {
        for r in [1.0, 1.3] {
            let g = grid(8, 12, r);
            let mut lin = Array2::zeros((8, 13));
            let mut quad = Array2::zeros((8, 13));
            for i in 0..8 {
                for j in 0..13 {
                    lin[[i, j]] = g.x2[j];
                    quad[[i, j]] = g.x2[j] * g.x2[j];
                }
            }
            let dl = g.ddx2_values(&lin);
            let dq = g.ddx2_values(&quad);
            let d2q = g.d2dx2_values(&quad);
            for i in 0..8 {
                for j in 0..13 {
                    assert!((dl[[i, j]] - 1.0).abs() < 1e-12, "r={r}");
                    assert!((dq[[i, j]] - 2.0 * g.x2[j]).abs() < 1e-11, "r={r}");
                    assert!((d2q[[i, j]] - 2.0).abs() < 1e-10, "r={r}");
                }
            }
        }
    }

    #[test]
    fn ddx2_richardson_ratio_on_boundary_layer_profile() {
        // refine keeping the stretching map fixed: n2 doubles, r -> sqrt(r)
        let geom = ChannelGeometry::new(1.0, 1.0).unwrap();
        let eval = |n2: usize, r: f64| -> f64 {
            let g = ChannelGrid::build(geom, 8, n2, r).unwrap();
            let mut f = Array2::zeros((8, n2 + 1));
            for i in 0..8 {
                for j in 0..=n2 {
                    f[[i, j]] = (-10.0 * g.x2[j]).exp();
                }
            }
            let df = g.ddx2_values(&f);
            let mut emax: f64 = 0.0;
            for j in 0..=n2 {
                let want = -10.0 * (-10.0 * g.x2[j]).exp();
                emax = emax.max((df[[0, j]] - want).abs());
            }
            emax
        };
        let ratio_total: f64 = 16.0; // coarse stretching r^n2 held fixed
        let e1 = eval(32, ratio_total.powf(1.0 / 32.0));
        let e2 = eval(64, ratio_total.powf(1.0 / 64.0));
        let ratio = e1 / e2;
        assert!(
            (3.2..=4.8).contains(&ratio),
            "expected second-order ratio about 4, got {ratio}"
        );
    }

    #[test]
    fn quadrature_on_constants_and_modes() {
        let geom = ChannelGeometry::new(2.0, 3.0).unwrap();
        let g = ChannelGrid::build(geom, 16, 10, 1.0).unwrap();
        let ones = Array2::from_elem((16, 11), 1.0);
        assert!((g.integrate_values(&ones) - 6.0).abs() < 1e-12);
        let mut f = Array2::zeros((16, 11));
        for i in 0..16 {
            for j in 0..11 {
                f[[i, j]] = (2.0 * std::f64::consts::PI * g.x1[i] / 2.0).sin();
            }
        }
        assert!(g.integrate_values(&f).abs() < 1e-12);
    }

    #[test]
    fn quadrature_resolves_boundary_layer_integral() {
        // f = exp(-U x2 / nu): integral over the channel = L * nu/U * (1 - exp(-hU/nu))
        let nu = 0.01;
        let geom = ChannelGeometry::new(1.0, 1.0).unwrap();
        let g = ChannelGrid::for_boundary_layer(geom, 8, nu, 4.0, 0.05).unwrap();
        assert!(g.min_spacing() <= nu / 4.0 * (1.0 + 1e-12));
        let n2 = g.n2();
        let mut f = Array2::zeros((8, n2 + 1));
        for i in 0..8 {
            for j in 0..=n2 {
                f[[i, j]] = (-g.x2[j] / nu).exp();
            }
        }
        let got = g.integrate_values(&f);
        let want = nu * (1.0 - (-1.0 / nu).exp());
        assert!(
            (got - want).abs() <= 0.01 * want,
            "integral {got} vs {want}"
        );
    }

    #[test]
    fn spectral_integration_by_parts_is_exact() {
        let g = grid(16, 8, 1.2);
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut f = Array2::zeros((16, 9));
        let mut p = Array2::zeros((16, 9));
        for i in 0..16 {
            for j in 0..9 {
                f[[i, j]] = (two_pi * g.x1[i]).sin() + 0.3 * (2.0 * two_pi * g.x1[i]).cos();
                p[[i, j]] = (two_pi * g.x1[i]).cos() * (1.0 + g.x2[j]);
            }
        }
        let a = g.integrate_values(&(&g.ddx1_values(&f) * &p));
        let b = g.integrate_values(&(&f * &g.ddx1_values(&p)));
        let scale = g.l2_norm_values(&f) * g.l2_norm_values(&p);
        assert!((a + b).abs() <= 1e-10 * scale.max(1.0));
    }

    #[test]
    fn refined_grid_keeps_coarse_nodes() {
        let g = grid(8, 16, 1.2);
        let gf = g.refined().unwrap();
        assert_eq!(gf.n2(), 32);
        for j in 0..=16 {
            assert!((g.x2[j] - gf.x2[2 * j]).abs() < 1e-10, "j={j}");
        }
    }
}
