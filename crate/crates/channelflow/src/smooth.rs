//! C-infinity transition functions built from `exp(-1/x)`, with analytic
//! first and second derivatives. Used by the corrector cutoff and by the
//! compactly supported initial-data stream function.

const TINY: f64 = 1e-6;

#[inline]
fn g(x: f64) -> f64 {
    if x <= TINY {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

#[inline]
fn dg(x: f64) -> f64 {
    if x <= TINY {
        0.0
    } else {
        (-1.0 / x).exp() / (x * x)
    }
}

#[inline]
fn d2g(x: f64) -> f64 {
    if x <= TINY {
        0.0
    } else {
        (-1.0 / x).exp() * (1.0 / (x * x * x * x) - 2.0 / (x * x * x))
    }
}

/// Monotone step: 0 for `t <= 0`, 1 for `t >= 1`, smooth in between.
pub fn step(t: f64) -> f64 {
    if t <= TINY {
        0.0
    } else if t >= 1.0 - TINY {
        1.0
    } else {
        let a = g(t);
        let b = g(1.0 - t);
        a / (a + b)
    }
}

pub fn step_d1(t: f64) -> f64 {
    if t <= TINY || t >= 1.0 - TINY {
        0.0
    } else {
        let a = g(t);
        let b = g(1.0 - t);
        let ap = dg(t);
        let bp = dg(1.0 - t);
        (ap * b + a * bp) / ((a + b) * (a + b))
    }
}

pub fn step_d2(t: f64) -> f64 {
    if t <= TINY || t >= 1.0 - TINY {
        0.0
    } else {
        let a = g(t);
        let b = g(1.0 - t);
        let ap = dg(t);
        let bp = dg(1.0 - t);
        let app = d2g(t);
        let bpp = d2g(1.0 - t);
        let den = a + b;
        let num = ap * b + a * bp;
        let dnum = app * b - a * bpp;
        let dden = ap - bp;
        (dnum * den - 2.0 * num * dden) / (den * den * den)
    }
}
