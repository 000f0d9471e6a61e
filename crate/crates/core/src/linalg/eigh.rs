//! Cyclic Jacobi eigensolver for complex Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary, then applies the real symmetric Jacobi rotation to the resulting
//! real 2x2 block. Off-diagonal mass decreases quadratically once sweeps get
//! close to convergence, so small matrices need only a handful of sweeps.

use num_complex::Complex;
use num_traits::Zero;

use super::matrix::{HermitianMatrix, Matrix, UnitaryMatrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 64;

/// Spectral decomposition `H = V diag(values) V^dagger`.
#[derive(Debug, Clone)]
pub struct Eigh<T> {
    pub values: Vec<T>,
    /// Eigenvectors as columns.
    pub vectors: Matrix<T>,
}

fn off_diagonal_norm<T: Real>(a: &Matrix<T>) -> T {
    let n = a.dim();
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s = s + a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn frobenius<T: Real>(a: &Matrix<T>) -> T {
    a.as_slice().iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

pub fn eigh<T: Real>(h: &HermitianMatrix<T>) -> Result<Eigh<T>> {
    let n = h.dim();
    let mut a = h.matrix().clone();
    // Symmetrize so that rounding in the input cannot bias the rotations.
    for i in 0..n {
        a[(i, i)] = Complex::new(a[(i, i)].re, T::zero());
        for j in (i + 1)..n {
            let avg = (a[(i, j)] + a[(j, i)].conj()).scale(T::lit(0.5));
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
    }
    let mut v = Matrix::identity(n);
    let scale = frobenius(&a);
    let target = T::epsilon() * scale.max(T::min_positive_value());

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= target || n < 2 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NumericalBreakdown {
                sweeps,
                off_diagonal: off.to_f64_lossy(),
                frobenius: scale.to_f64_lossy(),
            });
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let values = (0..n).map(|i| a[(i, i)].re).collect();
    Ok(Eigh { values, vectors: v })
}

fn rotate<T: Real>(a: &mut Matrix<T>, v: &mut Matrix<T>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag.is_zero() {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let phase = apq / mag; // e^{i phi}
    let theta = (aqq - app) / (mag + mag);
    let t = {
        let sign = if theta < T::zero() { -T::one() } else { T::one() };
        sign / (theta.abs() + (theta * theta + T::one()).sqrt())
    };
    let cos = T::one() / (t * t + T::one()).sqrt();
    let sin = t * cos;
    // J = D R with D = diag(1, e^{-i phi}), R = [[c, s], [-s, c]].
    let conj_phase = phase.conj();
    let j_pp = Complex::new(cos, T::zero());
    let j_pq = Complex::new(sin, T::zero());
    let j_qp = conj_phase.scale(-sin);
    let j_qq = conj_phase.scale(cos);

    let n = a.dim();
    // A <- A J
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * j_pp + akq * j_qp;
        a[(k, q)] = akp * j_pq + akq * j_qq;
    }
    // A <- J^dagger A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = j_pp.conj() * apk + j_qp.conj() * aqk;
        a[(q, k)] = j_pq.conj() * apk + j_qq.conj() * aqk;
    }
    a[(p, q)] = Complex::zero();
    a[(q, p)] = Complex::zero();
    a[(p, p)] = Complex::new(a[(p, p)].re, T::zero());
    a[(q, q)] = Complex::new(a[(q, q)].re, T::zero());
    // V <- V J
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * j_pp + vkq * j_qp;
        v[(k, q)] = vkp * j_pq + vkq * j_qq;
    }
}

/// `exp(-i h t)` through the spectral decomposition of `h`.
///
/// `h` is an angular frequency and `t` a time in matching units, so the
/// phases are `h t` radians.
pub fn expm_hermitian<T: Real>(h: &HermitianMatrix<T>, t: T) -> Result<UnitaryMatrix<T>> {
    let n = h.dim();
    if t.is_zero() {
        return Ok(UnitaryMatrix::identity(n));
    }
    let Eigh { values, vectors } = eigh(h)?;
    let phases: Vec<Complex<T>> = values
        .iter()
        .map(|&e| Complex::from_polar(T::one(), -(e * t)))
        .collect();
    let mut out = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = Complex::zero();
            for k in 0..n {
                acc = acc + vectors[(i, k)] * phases[k] * vectors[(j, k)].conj();
            }
            out[(i, j)] = acc;
        }
    }
    UnitaryMatrix::new(out)
}
