//! State-vector simulation of remote two-qubit operations.
//!
//! An operator with exactly one unimodular entry per row and column,
//! `T2(x, t) = diag(t) R2(x)`, is applied by Alice and lands on Bob's pair
//! `Y1 Y2` using two Bell pairs, four classical bits plus the five-bit index
//! `x`, and a recovery circuit built from CNOT and NOT gates. The
//! [`cavity`] module realizes every gate with three-level atoms, a
//! dispersive two-atom cavity, a resonant Jaynes-Cummings cavity and
//! classical pulses, and models staggered cavity entry.
//!
//! All numerics are generic over [`Real`]; the aliases below fix the scalar
//! to `f64` or `f32`.

// NaN-rejecting checks are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cavity;
pub mod circuit;
pub mod error;
pub mod linalg;
pub mod protocol;
pub mod sampling;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Amplitude, Real};

pub type StateVector64 = linalg::StateVector<f64>;
pub type StateVector32 = linalg::StateVector<f32>;
pub type Matrix64 = linalg::Matrix<f64>;
pub type Matrix32 = linalg::Matrix<f32>;
pub type UnitaryMatrix64 = linalg::UnitaryMatrix<f64>;
pub type UnitaryMatrix32 = linalg::UnitaryMatrix<f32>;
pub type HermitianMatrix64 = linalg::HermitianMatrix<f64>;
pub type HermitianMatrix32 = linalg::HermitianMatrix<f32>;
pub type DiagonalPhases64 = protocol::DiagonalPhases<f64>;
pub type DiagonalPhases32 = protocol::DiagonalPhases<f32>;
pub type ProtocolTranscript64 = protocol::ProtocolTranscript<f64>;
pub type Complex64 = num_complex::Complex<f64>;
pub type Complex32 = num_complex::Complex<f32>;
