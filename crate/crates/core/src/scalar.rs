//! Scalar abstraction for the numerical routines.
//!
//! Everything in this crate is written against [`Real`], a floating-point
//! scalar backed by `nalgebra`'s `RealField` plus a few conversion helpers.
//! Concrete implementations exist for `f32` and `f64`; the `f64` aliases at
//! the crate root are what most callers want.

use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    nalgebra::RealField
    + Copy
    + Default
    + FromPrimitive
    + ToPrimitive
    + std::iter::Sum<Self>
    + for<'a> std::iter::Sum<&'a Self>
{
    /// Lossy conversion from an `f64` literal or intermediate.
    fn from_f(v: f64) -> Self;
    /// Widening conversion to `f64`.
    fn to_f(self) -> f64;
    /// `e^x - 1`, accurate near zero.
    fn expm1(self) -> Self;
    /// Machine epsilon of the concrete type.
    fn eps() -> Self;
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            #[inline]
            fn from_f(v: f64) -> Self {
                v as $t
            }
            #[inline]
            fn to_f(self) -> f64 {
                self as f64
            }
            #[inline]
            fn expm1(self) -> Self {
                <$t>::exp_m1(self)
            }
            #[inline]
            fn eps() -> Self {
                <$t>::EPSILON
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);
