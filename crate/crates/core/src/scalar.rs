//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the solvers are generic over (`f32`, `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only if the target type cannot represent finite `f64`s.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("integer not representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Residual threshold that is attainable in this precision: `1e-10` for `f64`,
    /// about `1e-4` for `f32`.
    fn default_tolerance() -> Self {
        Self::lit(1e-10).max(Self::lit(1e3) * Self::epsilon())
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `|v|^{p-2} v` with the convention that it vanishes at `v = 0`.
#[inline]
pub(crate) fn signed_pow<T: Real>(v: T, p: T) -> T {
    if v == T::zero() {
        T::zero()
    } else {
        v.abs().powf(p - T::one()) * v.signum()
    }
}
