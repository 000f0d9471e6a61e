//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real field used for amplitudes, times and tolerances.
///
/// The two tolerance tiers mirror how the simulator checks its own output:
/// `constructive_tol` for quantities built directly from exact inputs
/// (normalization, gate constants, Hermiticity) and `derived_tol` for
/// quantities that went through an eigendecomposition or a long product.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    const CONSTRUCTIVE_TOL: f64;
    const DERIVED_TOL: f64;

    /// Lossy conversion from an `f64` literal.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("every f64 literal is representable")
    }

    fn constructive_tol() -> Self {
        Self::lit(Self::CONSTRUCTIVE_TOL)
    }

    fn derived_tol() -> Self {
        Self::lit(Self::DERIVED_TOL)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const CONSTRUCTIVE_TOL: f64 = 1e-12;
    const DERIVED_TOL: f64 = 1e-10;
}

impl Real for f32 {
    const CONSTRUCTIVE_TOL: f64 = 2e-6;
    const DERIVED_TOL: f64 = 2e-5;
}

/// Complex amplitude over a [`Real`] field.
pub type Amplitude<T> = Complex<T>;

#[cfg(test)]
pub(crate) fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

#[inline]
pub(crate) fn is_finite<T: Real>(z: Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}
