//! Scalar abstraction for the numeric kernels.
//!
//! Moments, pi reduction, effective capacitance, table interpolation,
//! boosting, and the error statistics are written against [`Scalar`] so they
//! run in either `f32` or `f64`. The pipeline itself instantiates everything
//! at `f64` (see the aliases at the crate root).

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar with the conversions the kernels need.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + std::iter::Sum + std::fmt::Debug + std::fmt::Display + 'static
{
    /// Lossy conversion from an `f64` constant. Panics only for values a
    /// float type cannot approximate, which none of our constants are.
    #[inline]
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("constant representable in scalar type")
    }

    /// Round-trip into `f64` for reporting and serialization.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar representable as f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
