//! Scalar abstraction for the numeric kernels.
//!
//! All core math is written against [`Scalar`] so the same kernels run in
//! `f32` or `f64` (the crate root exports `f64` aliases, which is what the
//! CLI and the test suites use).

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by every kernel in this crate.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
}

/// Shorthand for lifting an `f64` literal into the working scalar type.
#[inline]
pub(crate) fn lit<F: Scalar>(x: f64) -> F {
    F::from_f64(x).expect("literal must be representable in the scalar type")
}
