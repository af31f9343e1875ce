//! Scalar abstraction shared by every numerical routine.

use std::fmt::{Debug, Display, LowerExp};

use nalgebra::{Complex, RealField};
use nalgebra_sparse::io::MatrixMarketScalar;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar (`f32` or `f64`) the whole crate is generic over.
pub trait Real:
    RealField
    + Copy
    + FromPrimitive
    + ToPrimitive
    + MatrixMarketScalar
    + Display
    + LowerExp
    + Debug
    + Send
    + Sync
    + 'static
{
    /// Unit roundoff of the type.
    const EPS: Self;

    /// Converts an `f64` literal into this type.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite literal")
    }

    /// Rescales a tolerance quoted for double precision to this type's precision.
    ///
    /// Returns `x` unchanged for `f64`.
    #[inline]
    fn tol(x: f64) -> Self {
        let scaled =
            x * (<Self as ToPrimitive>::to_f64(&Self::EPS).unwrap_or(f64::EPSILON) / f64::EPSILON);
        Self::lit(scaled)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        <Self as ToPrimitive>::to_f64(&self).unwrap_or(f64::NAN)
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("representable count")
    }
}

impl Real for f32 {
    const EPS: Self = f32::EPSILON;
}

impl Real for f64 {
    const EPS: Self = f64::EPSILON;
}

#[inline]
pub(crate) fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}
