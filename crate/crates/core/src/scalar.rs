//! Floating-point abstraction shared by every numerical module.

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

/// Real scalar type the solvers are generic over.
///
/// Implemented for `f32` and `f64`. Literals are written as `T::lit(0.5)`.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into this type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Converts a count into this type.
    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Lossless widening used for reporting and I/O.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Default relative residual for the iterative solvers.
    ///
    /// `1e-10` when the type can reach it, otherwise a small multiple of the
    /// machine epsilon.
    fn default_rtol() -> Self {
        let floor = Self::epsilon() * Self::lit(100.0);
        floor.max(Self::lit(1e-10))
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `x` clamped to `[lo, hi]`.
#[inline]
pub fn clamp<T: Real>(x: T, lo: T, hi: T) -> T {
    x.max(lo).min(hi)
}
