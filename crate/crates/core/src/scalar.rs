//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating point type the library is generic over (`f32` or `f64`).
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
    /// Converts an `f64` constant into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("constant representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("integer representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Field element accepted by the dense linear algebra: a real or a complex
/// number over a [`Real`] base.
pub trait Scalar:
    Copy + NumAssign + std::ops::Neg<Output = Self> + Debug + Send + Sync + 'static
{
    type Real: crate::scalar::Real;

    fn modulus(self) -> Self::Real;
    fn from_real(r: Self::Real) -> Self;
}

impl<T: Real> Scalar for T {
    type Real = T;

    #[inline]
    fn modulus(self) -> T {
        self.abs()
    }

    #[inline]
    fn from_real(r: T) -> T {
        r
    }
}

impl<T: Real> Scalar for Complex<T> {
    type Real = T;

    #[inline]
    fn modulus(self) -> T {
        self.norm()
    }

    #[inline]
    fn from_real(r: T) -> Self {
        Complex::new(r, T::zero())
    }
}
