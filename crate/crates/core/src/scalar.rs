//! Floating point abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar: `f32` or `f64`.
///
/// Besides the `num-traits` surface this carries the complementary error
/// function, which the exit-time and kernel series need and which `Float`
/// does not provide.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Smallest tolerance that is meaningful for this type.
    const EPS_TOL: f64;

    fn erfc(self) -> Self;

    /// Converts an `f64` literal. Panics only for values no float can hold.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal out of range")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize out of range")
    }

    /// Standard normal CDF.
    #[inline]
    fn norm_cdf(self) -> Self {
        Self::lit(0.5) * (-self / Self::SQRT_2()).erfc()
    }

    /// Standard normal density.
    #[inline]
    fn norm_pdf(self) -> Self {
        (-self * self / Self::lit(2.0)).exp() / (Self::TAU()).sqrt()
    }
}

impl Real for f64 {
    const EPS_TOL: f64 = 1e-14;

    #[inline]
    fn erfc(self) -> Self {
        libm::erfc(self)
    }
}

impl Real for f32 {
    const EPS_TOL: f64 = 1e-6;

    #[inline]
    fn erfc(self) -> Self {
        libm::erfcf(self)
    }
}
