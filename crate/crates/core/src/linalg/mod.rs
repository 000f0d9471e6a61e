//! Dense complex linear algebra for small composite Hilbert spaces.

mod eigh;
mod matrix;
mod state;

pub use eigh::{eigh, expm_hermitian, Eigh};
pub use matrix::{HermitianMatrix, Matrix, UnitaryMatrix, DEFAULT_MAX_DIM};
pub use state::{fidelity, global_phase_align, phase_residual, AmplitudeRecord, StateVector};

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Operator analogue of [`global_phase_align`]: the unit scalar `phase`
/// minimizing `||a - phase b||_F`, and that Frobenius residual.
pub fn operator_phase_align<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<(Complex<T>, T)> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let tr = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .fold(Complex::zero(), |acc: Complex<T>, (&x, &y)| acc + x.conj() * y);
    let mag = tr.norm();
    if mag <= T::lit(1e-14) {
        return Err(Error::NoAlignment);
    }
    let phase = tr.conj() / mag;
    let residual = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(&x, &y)| (x - y * phase).norm_sqr())
        .sum::<T>()
        .sqrt();
    Ok((phase, residual))
}
