//! Symmetric positive definite pentadiagonal systems, `A = L D L^T`.

use crate::error::{Error, Result};

/// Symmetric pentadiagonal matrix stored by diagonals.
#[derive(Debug, Clone)]
pub struct Pentadiagonal {
    /// `A[i][i]`
    pub diag: Vec<f64>,
    /// `A[i][i+1]`, length `n - 1`
    pub upper1: Vec<f64>,
    /// `A[i][i+2]`, length `n - 2`
    pub upper2: Vec<f64>,
}

impl Pentadiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            diag: vec![0.0; n],
            upper1: vec![0.0; n.saturating_sub(1)],
            upper2: vec![0.0; n.saturating_sub(2)],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Adds `v` to the symmetric pair `(i, j)`; `|i - j| <= 2`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        match b - a {
            0 => self.diag[a] += v,
            1 => self.upper1[a] += v,
            2 => self.upper2[a] += v,
            _ => panic!("entry ({i}, {j}) outside the band"),
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i + 1 < n {
                    acc += self.upper1[i] * x[i + 1];
                }
                if i + 2 < n {
                    acc += self.upper2[i] * x[i + 2];
                }
                if i >= 1 {
                    acc += self.upper1[i - 1] * x[i - 1];
                }
                if i >= 2 {
                    acc += self.upper2[i - 2] * x[i - 2];
                }
                acc
            })
            .collect()
    }

    pub fn factor(&self) -> Result<Factored> {
        let n = self.len();
        let mut d = vec![0.0; n];
        let mut l1 = vec![0.0; n.saturating_sub(1)];
        let mut l2 = vec![0.0; n.saturating_sub(2)];
        let scale = self.diag.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            let mut di = self.diag[i];
            if i >= 1 {
                di -= l1[i - 1] * l1[i - 1] * d[i - 1];
            }
            if i >= 2 {
                di -= l2[i - 2] * l2[i - 2] * d[i - 2];
            }
            if !(di > 1e-14 * scale) {
                return Err(Error::DegenerateGeometry { pivot: i });
            }
            d[i] = di;
            if i + 1 < n {
                let mut b = self.upper1[i];
                if i >= 1 {
                    b -= l2[i - 1] * l1[i - 1] * d[i - 1];
                }
                l1[i] = b / di;
            }
            if i + 2 < n {
                l2[i] = self.upper2[i] / di;
            }
        }
        Ok(Factored { d, l1, l2 })
    }
}

#[derive(Debug, Clone)]
pub struct Factored {
    d: Vec<f64>,
    l1: Vec<f64>,
    l2: Vec<f64>,
}

impl Factored {
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 1..n {
            let mut v = b[i] - self.l1[i - 1] * b[i - 1];
            if i >= 2 {
                v -= self.l2[i - 2] * b[i - 2];
            }
            b[i] = v;
        }
        for (bi, di) in b.iter_mut().zip(&self.d) {
            *bi /= di;
        }
        for i in (0..n).rev() {
            let mut v = b[i];
            if i + 1 < n {
                v -= self.l1[i] * b[i + 1];
            }
            if i + 2 < n {
                v -= self.l2[i] * b[i + 2];
            }
            b[i] = v;
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
