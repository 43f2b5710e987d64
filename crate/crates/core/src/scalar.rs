//! Floating-point abstraction shared by the reliability, engine and decision layers.

use std::fmt;
use std::iter::Sum;

use num_traits::Float;

/// A real scalar usable for probabilities, hours and costs.
///
/// Implemented for `f32` and `f64`. The crate root exports `f64` aliases for
/// every generic type, which is what the file formats and the CLI use.
pub trait Scalar: Float + Sum + Default + fmt::Debug + fmt::Display + Send + Sync + 'static {
    /// Lossy conversion from an `f64` literal or parsed value.
    fn from_f64(value: f64) -> Self;

    /// Widening conversion used for reporting.
    fn as_f64(self) -> f64;

    /// `1 - e^{-x}`, accurate for small `x`.
    #[inline]
    fn one_minus_exp_neg(x: Self) -> Self {
        -(-x).exp_m1()
    }
}

impl Scalar for f64 {
    #[inline]
    fn from_f64(value: f64) -> Self {
        value
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    #[inline]
    fn from_f64(value: f64) -> Self {
        value as f32
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }
}
