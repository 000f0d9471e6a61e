use std::ops::Mul;

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{is_finite, Real};

/// Largest Hilbert-space dimension any operation will build.
pub const DEFAULT_MAX_DIM: usize = 4096;

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn diagonal(entries: &[Complex<T>]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    /// Builds from row-major data. `data.len()` must be a perfect square.
    pub fn from_row_major(data: Vec<Complex<T>>) -> Result<Self> {
        let dim = (data.len() as f64).sqrt().round() as usize;
        if dim * dim != data.len() {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        if !data.iter().all(|&z| is_finite(z)) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dim, data })
    }

    /// Builds from real row-major data.
    pub fn from_real(rows: &[&[f64]]) -> Result<Self> {
        let data = rows
            .iter()
            .flat_map(|r| r.iter().map(|&v| Complex::new(T::lit(v), T::zero())))
            .collect();
        Self::from_row_major(data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rhs.dim,
            });
        }
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] = out.data[i * n + j] + a * rhs.data[k * n + j];
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        Ok((0..self.dim)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(Complex::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect())
    }

    /// Tensor product with `self` as the most significant factor.
    pub fn kron(&self, rhs: &Self) -> Result<Self> {
        self.kron_with_limit(rhs, DEFAULT_MAX_DIM)
    }

    pub fn kron_with_limit(&self, rhs: &Self, max_dim: usize) -> Result<Self> {
        let dim = self
            .dim
            .checked_mul(rhs.dim)
            .filter(|&d| d <= max_dim)
            .ok_or(Error::SpaceTooLarge {
                dim: self.dim.saturating_mul(rhs.dim),
                max: max_dim,
            })?;
        let (m, n) = (self.dim, rhs.dim);
        let mut out = Self::zeros(dim);
        for i1 in 0..m {
            for j1 in 0..m {
                let a = self[(i1, j1)];
                for i2 in 0..n {
                    for j2 in 0..n {
                        out[(i1 * n + i2, j1 * n + j2)] = a * rhs[(i2, j2)];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Largest entrywise modulus of `self - rhs`.
    pub fn max_abs_diff(&self, rhs: &Self) -> T {
        if self.dim != rhs.dim {
            return T::infinity();
        }
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(&a, &b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    /// Largest entrywise modulus of `U^dagger U - I`.
    pub fn unitarity_deviation(&self) -> T {
        let prod = self.adjoint().matmul(self).expect("square");
        prod.max_abs_diff(&Self::identity(self.dim))
    }

    pub fn hermiticity_deviation(&self) -> T {
        self.max_abs_diff(&self.adjoint())
    }

    /// Restriction onto the span of the given basis indices (rows and columns).
    pub fn restrict(&self, indices: &[usize]) -> Self {
        let n = indices.len();
        let mut out = Self::zeros(n);
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate() {
                out[(a, b)] = self[(i, j)];
            }
        }
        out
    }

    /// Lossy conversion to `f64` entries, for reports.
    pub fn to_f64(&self) -> Matrix<f64> {
        Matrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .map(|z| Complex::new(z.re.to_f64_lossy(), z.im.to_f64_lossy()))
                .collect(),
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.dim + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.dim + j]
    }
}

impl<'a, T: Real> Mul<&'a Matrix<T>> for &'a Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: &'a Matrix<T>) -> Matrix<T> {
        self.matmul(rhs).expect("matrix dimensions agree")
    }
}

/// Square matrix with `U^dagger U = I` checked at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix<T>(Matrix<T>);

impl<T: Real> UnitaryMatrix<T> {
    /// Checks unitarity at the derived-quantity tolerance.
    pub fn new(m: Matrix<T>) -> Result<Self> {
        Self::with_tolerance(m, T::derived_tol())
    }

    pub fn with_tolerance(m: Matrix<T>, tol: T) -> Result<Self> {
        let deviation = m.unitarity_deviation();
        if !(deviation <= tol) {
            return Err(Error::NotUnitary {
                deviation: deviation.to_f64_lossy(),
            });
        }
        Ok(Self(m))
    }

    /// Wraps a product of unitaries without re-checking.
    pub(crate) fn from_trusted(m: Matrix<T>) -> Self {
        debug_assert!(m.unitarity_deviation() < T::lit(1e-3));
        Self(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self(Matrix::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// Product `self * rhs` (`rhs` acts first).
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        Ok(Self(self.0.matmul(&rhs.0)?))
    }

    pub fn kron(&self, rhs: &Self) -> Result<Self> {
        Ok(Self(self.0.kron(&rhs.0)?))
    }

    pub fn kron_with_limit(&self, rhs: &Self, max_dim: usize) -> Result<Self> {
        Ok(Self(self.0.kron_with_limit(&rhs.0, max_dim)?))
    }

    pub fn scale_phase(&self, phase: Complex<T>) -> Self {
        Self(self.0.scale(phase))
    }
}

impl<T> std::ops::Index<(usize, usize)> for UnitaryMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, idx: (usize, usize)) -> &Complex<T> {
        &self.0[idx]
    }
}

/// Square matrix with `H = H^dagger` checked at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix<T>(Matrix<T>);

impl<T: Real> HermitianMatrix<T> {
    pub fn new(m: Matrix<T>) -> Result<Self> {
        let deviation = m.hermiticity_deviation();
        if !(deviation <= T::constructive_tol()) {
            return Err(Error::NotHermitian {
                deviation: deviation.to_f64_lossy(),
            });
        }
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.0
    }

    pub fn scale(&self, s: T) -> Self {
        Self(self.0.scale(Complex::new(s, T::zero())))
    }
}
