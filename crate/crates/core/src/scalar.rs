//! Floating-point scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar type the rate-region math is generic over.
///
/// Implemented for `f32` and `f64`. The tolerance hooks let the same
/// algorithms run at either precision; `f64` uses the contract values
/// (1e-12 for root finding, 1e-9 for membership slack).
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FromStr
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Absolute tolerance for bracketed root finding.
    fn root_tol() -> Self;

    /// Slack allowed on power-allocation sums and rate comparisons.
    fn membership_tol() -> Self;

    /// Converts an `f64` literal; panics only if the value is unrepresentable,
    /// which cannot happen for finite literals.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite literal fits the scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).unwrap_or_else(Self::infinity)
    }
}

impl Scalar for f64 {
    #[inline]
    fn root_tol() -> Self {
        1e-12
    }

    #[inline]
    fn membership_tol() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    #[inline]
    fn root_tol() -> Self {
        1e-6
    }

    #[inline]
    fn membership_tol() -> Self {
        1e-4
    }
}

/// Bisection on a nondecreasing function for the crossing `f(x) = target`
/// within `[lo, hi]`, assuming `f(lo) <= target <= f(hi)`.
///
/// Stops when the bracket is narrower than `tol * max(1, hi)` or stops shrinking.
pub(crate) fn bisect_increasing<T: Scalar>(
    f: impl Fn(T) -> T,
    target: T,
    mut lo: T,
    mut hi: T,
    tol: T,
) -> T {
    let two = T::lit(2.0);
    for _ in 0..400 {
        let width = hi - lo;
        if width <= tol * hi.max(T::one()) {
            break;
        }
        let mid = lo + width / two;
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo + (hi - lo) / two
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_finds_sqrt_two() {
        let r = bisect_increasing(|x: f64| x * x, 2.0, 0.0, 2.0, 1e-12);
        assert!((r - 2f64.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn bisection_f32() {
        let r = bisect_increasing(|x: f32| x * x * x, 27.0, 0.0, 10.0, f32::root_tol());
        assert!((r - 3.0).abs() < 1e-4);
    }
}
