//! Small dense vector and symmetric-matrix helpers.

use crate::error::{domain, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Returns `a / ‖a‖`, or `None` when the norm is zero or not finite.
pub fn normalized(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    if n == 0.0 || !n.is_finite() {
        return None;
    }
    Some(a.iter().map(|x| x / n).collect())
}

/// Solves `m x = b` by Cholesky factorization; `None` when `m` is not
/// numerically positive definite.
pub fn cholesky_solve(m: &SymMatrix, b: &[f64]) -> Option<Vec<f64>> {
    let n = m.dim();
    let mut l = m.as_slice().to_vec();
    for j in 0..n {
        let mut diag = l[j * n + j];
        for k in 0..j {
            diag -= l[j * n + k] * l[j * n + k];
        }
        if !(diag > 0.0) {
            return None;
        }
        let diag = diag.sqrt();
        l[j * n + j] = diag;
        for i in j + 1..n {
            let mut s = l[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / diag;
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[i * n + k] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= l[k * n + i] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    Some(y)
}

/// Dense square matrix in row-major order, intended to hold symmetric data.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            *m.at_mut(i, i) = v;
        }
        m
    }

    /// Row-major construction; the caller is responsible for symmetry,
    /// which the eigensolver checks.
    pub fn from_rows(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return domain(format!("expected {} entries, got {}", n * n, data.len()));
        }
        Ok(Self { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    /// Expands order-2 canonical storage (`(a, b)` with `a <= b` at rank
    /// `a + b(b+1)/2`) into a full matrix.
    pub(crate) fn from_packed_colex(n: usize, packed: &[f64]) -> Self {
        let mut m = Self::zeros(n);
        let mut p = 0;
        for b in 0..n {
            for a in 0..=b {
                m.data[a * n + b] = packed[p];
                m.data[b * n + a] = packed[p];
                p += 1;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub(crate) fn mirror_upper(&mut self) {
        let n = self.n;
        for i in 0..n {
            for j in i + 1..n {
                self.data[j * n + i] = self.data[i * n + j];
            }
        }
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    /// Largest absolute row sum, an upper bound on the spectral norm.
    pub fn max_row_sum(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                worst = worst.max((self.at(i, j) - self.at(j, i)).abs());
            }
        }
        worst
    }

    /// `self + c · u uᵀ`.
    pub fn rank_one_update(&self, c: f64, u: &[f64]) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                m.data[i * self.n + j] += c * u[i] * u[j];
            }
        }
        m
    }

    /// `self + c·I`.
    pub fn shifted(&self, c: f64) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m.data[i * self.n + i] += c;
        }
        m
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|x| c * x).collect(),
        }
    }
}
