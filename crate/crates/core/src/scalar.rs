//! Scalar abstraction shared by every numerical routine in the crate.

use nalgebra as na;
use num_traits as nt;
use std::fmt::{Debug, Display, LowerExp};

/// Real floating point type the discretization is generic over (`f32` or `f64`).
///
/// Method calls such as `sqrt` or `abs` resolve through [`na::RealField`]; literal
/// constants go through [`Real::lit`].
pub trait Real:
    Copy + nt::FromPrimitive + nt::ToPrimitive + na::RealField + na::Scalar + Display + LowerExp + Debug
{
    /// Converts an `f64` literal into `Self`, rounding if needed.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as nt::FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        <Self as nt::FromPrimitive>::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        <Self as nt::ToPrimitive>::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
