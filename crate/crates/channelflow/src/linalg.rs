//! Small banded direct solvers used by the Poisson and diffusion kernels.
//!
//! Everything here is real, dense-in-band, and deterministic: a Thomas
//! factorization for strictly tridiagonal systems and an LU with partial
//! pivoting for general narrow bands (the boundary closures of the
//! wall-normal operators make a few rows wider than tridiagonal).

use crate::error::{ChannelError, Result};

/// Tridiagonal matrix factored once, solved many times (no pivoting; callers
/// must supply diagonally dominant systems).
#[derive(Debug, Clone)]
pub struct TridiagLu {
    // l[i] multiplies row i-1 during forward elimination, i in 1..n
    l: Vec<f64>,
    d: Vec<f64>,
    u: Vec<f64>,
}

impl TridiagLu {
    /// `lower[0]` and `upper[n-1]` are ignored.
    pub fn factor(lower: &[f64], diag: &[f64], upper: &[f64]) -> Result<Self> {
        let n = diag.len();
        assert!(n >= 1 && lower.len() == n && upper.len() == n);
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n];
        d[0] = diag[0];
        if d[0] == 0.0 {
            return Err(ChannelError::SingularSystem("tridiagonal pivot 0".into()));
        }
        for i in 1..n {
            l[i] = lower[i] / d[i - 1];
            d[i] = diag[i] - l[i] * upper[i - 1];
            if d[i] == 0.0 {
                return Err(ChannelError::SingularSystem(format!("tridiagonal pivot {i}")));
            }
        }
        Ok(Self { l, d, u: upper.to_vec() })
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.d.len();
        assert_eq!(b.len(), n);
        for i in 1..n {
            b[i] -= self.l[i] * b[i - 1];
        }
        b[n - 1] /= self.d[n - 1];
        for i in (0..n - 1).rev() {
            b[i] = (b[i] - self.u[i] * b[i + 1]) / self.d[i];
        }
    }
}

/// Band matrix in LAPACK-style storage with room for pivoting fill:
/// entry (i, j) lives at `data[j * ldab + (kl + ku + i - j)]` for
/// `j - ku - kl <= i <= j + kl`.
#[derive(Debug, Clone)]
pub struct Banded {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    data: Vec<f64>,
}

impl Banded {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        Self { n, kl, ku, ldab, data: vec![0.0; ldab * n] }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i + self.ku + self.kl >= j && i <= j + self.kl, "outside band: ({i},{j})");
        j * self.ldab + (self.kl + self.ku + i - j)
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i + self.ku + self.kl >= j && i <= j + self.kl {
            self.data[self.idx(i, j)]
        } else {
            0.0
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// y = A x using the stored (unfactored) bands. Only valid before `factor`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku + self.kl);
            let hi = (j + self.kl).min(self.n - 1);
            for i in lo..=hi {
                y[i] += self.get(i, j) * x[j];
            }
        }
        y
    }

    /// LU with partial pivoting; consumes the band storage.
    pub fn factor(mut self) -> Result<BandedLu> {
        let n = self.n;
        let kl = self.kl;
        let kw = self.ku + self.kl; // working upper bandwidth after fill
        let mut ipiv = vec![0usize; n];
        for j in 0..n {
            // pivot search in rows j..=j+kl of column j
            let hi = (j + kl).min(n - 1);
            let mut p = j;
            let mut pmax = self.get(j, j).abs();
            for i in (j + 1)..=hi {
                let v = self.get(i, j).abs();
                if v > pmax {
                    pmax = v;
                    p = i;
                }
            }
            if pmax == 0.0 {
                return Err(ChannelError::SingularSystem(format!("banded pivot column {j}")));
            }
            ipiv[j] = p;
            if p != j {
                let chi = (j + kw).min(n - 1);
                for c in j..=chi {
                    let a = self.idx(j, c);
                    let b = self.idx(p, c);
                    self.data.swap(a, b);
                }
            }
            let pivot = self.get(j, j);
            for i in (j + 1)..=hi {
                let m = self.get(i, j) / pivot;
                self.set(i, j, m);
                if m != 0.0 {
                    let chi = (j + kw).min(n - 1);
                    for c in (j + 1)..=chi {
                        let v = self.get(i, c) - m * self.get(j, c);
                        self.set(i, c, v);
                    }
                }
            }
        }
        Ok(BandedLu { inner: self, ipiv })
    }
}

#[derive(Debug, Clone)]
pub struct BandedLu {
    inner: Banded,
    ipiv: Vec<usize>,
}

impl BandedLu {
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let a = &self.inner;
        let n = a.n;
        assert_eq!(b.len(), n);
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let hi = (j + a.kl).min(n - 1);
            let bj = b[j];
            for i in (j + 1)..=hi {
                b[i] -= a.get(i, j) * bj;
            }
        }
        let kw = a.ku + a.kl;
        for j in (0..n).rev() {
            let chi = (j + kw).min(n - 1);
            let mut s = b[j];
            for c in (j + 1)..=chi {
                s -= a.get(j, c) * b[c];
            }
            b[j] = s / a.get(j, j);
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
