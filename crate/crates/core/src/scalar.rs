//! Floating point abstraction shared by every solver in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar type the discretizations are generic over.
///
/// Implemented for `f32` and `f64`. Table reproduction and the CLI use `f64`.
pub trait Real:
    'static
    + Float
    + FloatConst
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
{
    /// Machine-level tolerance used by root solves and breakpoint snapping.
    const ROOT_TOL: f64;

    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f32 {
    const ROOT_TOL: f64 = 1e-7;
}

impl Real for f64 {
    const ROOT_TOL: f64 = 1e-15;
}

/// Wraps `x` into the half-open periodic interval `[a, a + len)`.
#[inline]
pub fn wrap_periodic<T: Real>(x: T, a: T, len: T) -> T {
    let mut r = (x - a) % len;
    if r < T::zero() {
        r += len;
    }
    // `%` can round up to `len` for tiny negative inputs.
    if r >= len {
        r -= len;
    }
    a + r
}
