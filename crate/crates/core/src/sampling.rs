//! Random inputs for verification campaigns.

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::linalg::StateVector;
use crate::protocol::DiagonalPhases;
use crate::scalar::Real;

/// Haar-random pure state: normalized i.i.d. complex Gaussians.
pub fn haar_state<T: Real, R: Rng + ?Sized>(rng: &mut R, dims: &[usize]) -> StateVector<T> {
    let n: usize = dims.iter().product();
    let amps = (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex::new(T::lit(re), T::lit(im))
        })
        .collect();
    StateVector::normalized(dims.to_vec(), amps).expect("Gaussian vector is nonzero")
}

/// Four phases drawn uniformly on the circle.
pub fn random_phases<T: Real, R: Rng + ?Sized>(rng: &mut R) -> DiagonalPhases<T> {
    let dist = Uniform::new(0.0, std::f64::consts::TAU).expect("valid range");
    DiagonalPhases::from_angles([(); 4].map(|_| T::lit(dist.sample(rng))))
}

/// Random unitary on `dim` levels (QR of a complex Ginibre matrix by
/// Gram-Schmidt, with the usual phase fix).
pub fn haar_unitary<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
) -> crate::linalg::UnitaryMatrix<T> {
    let mut cols: Vec<Vec<Complex<T>>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<Complex<T>> = (0..dim)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex::new(T::lit(re), T::lit(im))
            })
            .collect();
        for _ in 0..2 {
            for u in &cols {
                let proj = u
                    .iter()
                    .zip(&v)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (&a, &b)| acc + a.conj() * b);
                v.iter_mut().zip(u).for_each(|(x, &a)| *x = *x - a * proj);
            }
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if n > T::lit(1e-6) {
            v.iter_mut().for_each(|x| *x = x.unscale(n));
            cols.push(v);
        }
    }
    let mut m = crate::linalg::Matrix::zeros(dim);
    for (j, col) in cols.iter().enumerate() {
        for (i, &z) in col.iter().enumerate() {
            m[(i, j)] = z;
        }
    }
    crate::linalg::UnitaryMatrix::new(m).expect("orthonormal columns")
}
