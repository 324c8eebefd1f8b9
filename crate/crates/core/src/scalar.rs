//! Floating-point abstraction the numeric core is generic over.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive};

/// Scalar type for all solver arithmetic: `f64` in production (the crate-root
/// aliases), `f32` when storage outweighs accuracy.
pub trait Scalar:
    Float
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum<Self>
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Convert an `f64` constant into the scalar type.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("constant representable in scalar type")
    }

    /// `|a - b| <= tol * max(1, |a|, |b|)`.
    #[inline]
    fn close(self, other: Self, tol: Self) -> bool {
        let scale = Self::one().max(self.abs()).max(other.abs());
        (self - other).abs() <= tol * scale
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + Sum<T>
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}
