//! Scalar abstraction for cost values.
//!
//! All cost tables, messages and bounds are generic over [`Cost`], which is
//! blanket-implemented for every float type satisfying the bounds (`f32`,
//! `f64`). Positive infinity encodes a hard constraint; NaN and negative
//! infinity are rejected at model construction.

use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::Add;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive};

/// Floating-point type usable as an energy value.
pub trait Cost:
    Float + FromPrimitive + FromStr + Display + Debug + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` constant (tolerances, weights) into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable in cost type")
    }

    /// True for finite values and `+inf`.
    #[inline]
    fn is_extended(self) -> bool {
        !self.is_nan() && self != Self::neg_infinity()
    }
}

impl<T> Cost for T where
    T: Float + FromPrimitive + FromStr + Display + Debug + Default + Sum + Send + Sync + 'static
{
}

/// A real number or `+inf`, with a total order.
///
/// Negative infinity and NaN are not representable.
#[derive(Clone, Copy, PartialEq, Default)]
pub struct ExtendedCost<T: Cost>(T);

impl<T: Cost> ExtendedCost<T> {
    /// Wraps `value`, or returns `None` for NaN and `-inf`.
    pub fn new(value: T) -> Option<Self> {
        value.is_extended().then_some(Self(value))
    }

    pub fn finite(value: T) -> Self {
        assert!(value.is_finite(), "ExtendedCost::finite called with {value}");
        Self(value)
    }

    pub fn infinity() -> Self {
        Self(T::infinity())
    }

    pub fn zero() -> Self {
        Self(T::zero())
    }

    #[inline]
    pub fn value(self) -> T {
        self.0
    }

    #[inline]
    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    /// The finite value, if any.
    pub fn as_finite(self) -> Option<T> {
        self.0.is_finite().then_some(self.0)
    }
}

impl<T: Cost> Add for ExtendedCost<T> {
    type Output = Self;

    #[inline]
    fn add(self, rhs: Self) -> Self {
        // inf + finite and inf + inf both stay inf; no -inf exists to cancel.
        Self(self.0 + rhs.0)
    }
}

impl<T: Cost> Sum for ExtendedCost<T> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |a, b| a + b)
    }
}

impl<T: Cost> Eq for ExtendedCost<T> {}

impl<T: Cost> PartialOrd for ExtendedCost<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Cost> Ord for ExtendedCost<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .partial_cmp(&other.0)
            .expect("ExtendedCost never holds NaN")
    }
}

impl<T: Cost> Debug for ExtendedCost<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl<T: Cost> Display for ExtendedCost<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        Display::fmt(&self.0, f)
    }
}

/// Minimum over a slice, ignoring nothing: returns `+inf` for an empty or
/// all-infinite slice.
#[inline]
pub(crate) fn min_of<T: Cost>(values: &[T]) -> T {
    values.iter().copied().fold(T::infinity(), T::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nan_and_negative_infinity() {
        assert!(ExtendedCost::new(f64::NAN).is_none());
        assert!(ExtendedCost::new(f64::NEG_INFINITY).is_none());
        assert!(ExtendedCost::new(f64::INFINITY).is_some());
        assert!(ExtendedCost::new(-3.5f32).is_some());
    }

    #[test]
    fn extended_addition() {
        let one = ExtendedCost::finite(1.0);
        let inf = ExtendedCost::<f64>::infinity();
        assert_eq!((one + one).value(), 2.0);
        assert!((one + inf).is_infinite());
        assert!((inf + inf).is_infinite());
    }

    #[test]
    fn total_order_puts_infinity_last() {
        let mut v = vec![
            ExtendedCost::<f64>::infinity(),
            ExtendedCost::finite(1e300),
            ExtendedCost::finite(-2.0),
        ];
        v.sort();
        assert_eq!(v[0].value(), -2.0);
        assert!(v[2].is_infinite());
        assert!(ExtendedCost::finite(f64::MAX) < ExtendedCost::infinity());
    }
}
