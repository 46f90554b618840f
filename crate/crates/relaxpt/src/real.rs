//! Scalar abstraction over the two supported precisions.
//!
//! All solver and builder code is generic over [`Real`] so that the same
//! iteration can run in hardware `f64` or in software double-double
//! arithmetic ([`crate::dd::DoubleDouble`], ~31 significant decimal digits).

use std::fmt::{Debug, Display};
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

/// A real scalar usable by the iteration kernels.
///
/// Implementations must be totally ordered on finite values and must
/// convert exactly from `f64` (every `f64` is representable).
pub trait Real:
    Copy
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Send
    + Sync
    + 'static
{
    const ZERO: Self;
    const ONE: Self;

    /// Exact embedding of an `f64`.
    fn from_f64(x: f64) -> Self;

    /// Nearest `f64`.
    fn to_f64(self) -> f64;

    fn abs(self) -> Self;

    fn sqrt(self) -> Self;

    fn is_finite(self) -> bool;

    fn infinity() -> Self;

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Real for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;

    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }

    #[inline]
    fn to_f64(self) -> f64 {
        self
    }

    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }

    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }

    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }

    #[inline]
    fn infinity() -> Self {
        f64::INFINITY
    }
}

/// Euclidean norm of a slice.
pub fn norm2<T: Real>(v: &[T]) -> T {
    let mut acc = T::ZERO;
    for &x in v {
        acc += x * x;
    }
    acc.sqrt()
}

/// Euclidean distance between two slices of equal length.
pub fn dist2<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = T::ZERO;
    for (&x, &y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc.sqrt()
}

/// Standard basis vector `e_i` of the given dimension.
pub fn basis_vector<T: Real>(dim: usize, i: usize) -> Vec<T> {
    let mut v = vec![T::ZERO; dim];
    v[i] = T::ONE;
    v
}
