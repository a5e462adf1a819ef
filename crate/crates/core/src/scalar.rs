//! Real scalar abstraction.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point type the linear algebra and detectors are generic over.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Elementwise tolerance (relative to the largest entry, floored at one)
    /// used when checking that a matrix is Hermitian.
    const HERMITIAN_TOL: f64;
    /// Relative pivot floor for Cholesky factorization.
    const PIVOT_TOL: f64;
    /// Rank cutoff for Gram-Schmidt style orthogonalization.
    const RANK_TOL: f64;

    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const HERMITIAN_TOL: f64 = 1e-10;
    const PIVOT_TOL: f64 = 1e-12;
    const RANK_TOL: f64 = 1e-10;
}

impl Real for f32 {
    const HERMITIAN_TOL: f64 = 1e-4;
    const PIVOT_TOL: f64 = 1e-7;
    const RANK_TOL: f64 = 1e-5;
}

#[inline]
pub(crate) fn is_finite<T: Real>(z: &num_complex::Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}
