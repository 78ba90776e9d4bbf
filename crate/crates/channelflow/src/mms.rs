//! Manufactured solutions for solver verification on the unit channel.
//!
//! The reference flow is the divergence-free field
//!
//! ```text
//! chi = A cos(omega t) sin(2 pi x1) sin^2(pi x2)
//! v   = perp_grad(chi)
//! ```
//!
//! which vanishes on both walls, so it is admissible for the Dirichlet and
//! the inflow/outflow boundary conditions alike. Forcings are assembled from
//! the analytic derivatives so the discretization error is the only error.

use std::sync::Arc;

use crate::fields::VectorField;
use crate::forcing::Forcing;
use crate::grid::{BackgroundFlow, ChannelGrid};

#[derive(Debug, Clone, Copy)]
pub struct ManufacturedFlow {
    pub amplitude: f64,
    pub omega: f64,
}

struct Point {
    v1: f64,
    v2: f64,
    vt1: f64,
    vt2: f64,
    d1v1: f64,
    d2v1: f64,
    d1v2: f64,
    d2v2: f64,
    lap1: f64,
    lap2: f64,
}

impl ManufacturedFlow {
    fn at(&self, t: f64, x1: f64, x2: f64) -> Point {
        let two_pi = 2.0 * std::f64::consts::PI;
        let pi = std::f64::consts::PI;
        let a = self.amplitude;
        let c = (self.omega * t).cos();
        let cdot = -self.omega * (self.omega * t).sin();
        let s = (two_pi * x1).sin();
        let co = (two_pi * x1).cos();
        let p = (pi * x2).sin().powi(2);
        let p1 = pi * (2.0 * pi * x2).sin();
        let p2 = 2.0 * pi * pi * (2.0 * pi * x2).cos();
        let p3 = -4.0 * pi * pi * p1; // third derivative of sin^2(pi x2)
        let v1 = -a * c * s * p1;
        let v2 = a * c * two_pi * co * p;
        Point {
            v1,
            v2,
            vt1: -a * cdot * s * p1,
            vt2: a * cdot * two_pi * co * p,
            d1v1: -a * c * two_pi * co * p1,
            d2v1: -a * c * s * p2,
            d1v2: -a * c * two_pi * two_pi * s * p,
            d2v2: a * c * two_pi * co * p1,
            lap1: a * c * s * (two_pi * two_pi * p1 - p3),
            lap2: -two_pi * two_pi * v2 + a * c * two_pi * co * p2,
        }
    }

    pub fn velocity(&self, grid: &Arc<ChannelGrid>, t: f64) -> VectorField {
        VectorField::from_fn(
            grid,
            |x1, x2| self.at(t, x1, x2).v1,
            |x1, x2| self.at(t, x1, x2).v2,
        )
    }

    fn forcing_at(&self, t: f64, x1: f64, x2: f64, bg: BackgroundFlow, nu: f64) -> (f64, f64) {
        let p = self.at(t, x1, x2);
        let (ua, uw) = bg.velocity();
        let f1 = p.vt1 + p.v1 * p.d1v1 + p.v2 * p.d2v1 + ua * p.d1v1 + uw * p.d2v1 - nu * p.lap1;
        let f2 = p.vt2 + p.v1 * p.d1v2 + p.v2 * p.d2v2 + ua * p.d1v2 + uw * p.d2v2 - nu * p.lap2;
        (f1, f2)
    }

    /// Reduced forcing closing the viscous homogenized system on this flow.
    pub fn ns_forcing(self, bg: BackgroundFlow, nu: f64) -> Forcing {
        Forcing::time_dependent(move |t, grid| {
            VectorField::from_fn(
                grid,
                |x1, x2| self.forcing_at(t, x1, x2, bg, nu).0,
                |x1, x2| self.forcing_at(t, x1, x2, bg, nu).1,
            )
        })
    }

    /// Reduced forcing closing the inviscid homogenized system on this flow.
    pub fn euler_forcing(self, bg: BackgroundFlow) -> Forcing {
        self.ns_forcing(bg, 0.0)
    }
}
