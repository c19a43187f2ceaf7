//! Dense complex square matrices.
//!
//! [`CMatrix`] wraps a `faer` matrix so that the rest of the crate can stay
//! agnostic of the backend; row-major import/export is provided for I/O.

pub use faer::c64;
use faer::{Mat, MatRef};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    inner: Mat<c64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { inner: Mat::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { inner: Mat::identity(dim, dim) }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> c64) -> Self {
        Self { inner: Mat::from_fn(dim, dim, f) }
    }

    pub fn from_diagonal(diag: &[c64]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { diag[i] } else { c64::new(0.0, 0.0) })
    }

    /// Builds a matrix from `dim * dim` entries in row-major order and rejects
    /// non-finite values.
    pub fn from_row_major(dim: usize, entries: &[c64]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension("matrix dimension must be positive".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::InvalidDimension(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        let m = Self::from_fn(dim, |i, j| entries[i * dim + j]);
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_real_row_major(dim: usize, entries: &[f64]) -> Result<Self> {
        let c: Vec<c64> = entries.iter().map(|&x| c64::new(x, 0.0)).collect();
        Self::from_row_major(dim, &c)
    }

    /// Wraps an existing square `faer` matrix.
    pub fn from_mat(inner: Mat<c64>) -> Result<Self> {
        if inner.nrows() != inner.ncols() {
            return Err(Error::InvalidDimension(format!(
                "matrix must be square, got {}x{}",
                inner.nrows(),
                inner.ncols()
            )));
        }
        Ok(Self { inner })
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> c64 {
        self.inner[(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: c64) {
        self.inner[(i, j)] = value;
    }

    pub fn as_mat(&self) -> MatRef<'_, c64> {
        self.inner.as_ref()
    }

    pub fn into_mat(self) -> Mat<c64> {
        self.inner
    }

    pub fn to_row_major(&self) -> Vec<c64> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<c64> {
        (0..self.dim()).map(|i| self.inner[(i, j)]).collect()
    }

    pub fn check_finite(&self) -> Result<()> {
        let d = self.dim();
        for j in 0..d {
            for i in 0..d {
                let z = self.inner[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        Self { inner: self.inner.adjoint().to_owned() }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        Self { inner: &self.inner * &rhs.inner }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self { inner: &self.inner + &rhs.inner }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self { inner: &self.inner - &rhs.inner }
    }

    pub fn scale(&self, s: c64) -> Self {
        Self::from_fn(self.dim(), |i, j| self.inner[(i, j)] * s)
    }

    /// Matrix–vector product `A v`.
    pub fn apply(&self, v: &[c64]) -> Vec<c64> {
        let d = self.dim();
        assert_eq!(v.len(), d, "vector length must match matrix dimension");
        let mut out = vec![c64::new(0.0, 0.0); d];
        for (j, &vj) in v.iter().enumerate() {
            if vj == c64::new(0.0, 0.0) {
                continue;
            }
            let col = self.inner.col(j);
            for (o, &a) in out.iter_mut().zip(col.iter()) {
                *o += a * vj;
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm_l2()
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.norm_max()
    }

    /// `‖A − A†‖_F`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.sub(&self.adjoint()).frobenius_norm()
    }

    /// `‖A†A − I‖_F`.
    pub fn unitarity_defect(&self) -> f64 {
        self.adjoint().matmul(self).sub(&Self::identity(self.dim())).frobenius_norm()
    }

    pub fn is_real(&self) -> bool {
        let d = self.dim();
        (0..d).all(|j| (0..d).all(|i| self.inner[(i, j)].im == 0.0))
    }

    pub fn is_diagonal(&self) -> bool {
        let d = self.dim();
        (0..d).all(|j| (0..d).all(|i| i == j || self.inner[(i, j)] == c64::new(0.0, 0.0)))
    }
}

pub(crate) fn zero() -> c64 {
    c64::new(0.0, 0.0)
}

/// `⟨x, y⟩ = Σ conj(x_i) y_i`.
pub fn dot(x: &[c64], y: &[c64]) -> c64 {
    x.iter().zip(y).fold(zero(), |acc, (a, b)| acc + a.conj() * b)
}

pub fn norm(x: &[c64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
