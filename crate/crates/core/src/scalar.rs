//! Scalar abstraction shared by all numerical routines.
//!
//! Everything in this crate is generic over [`Real`], so the same code runs in
//! `f32`, `f64` or double-double ([`twofloat::TwoFloat`]) arithmetic. The
//! extended type matters in topological phases, where mode energies fall far
//! below the `f64` unit roundoff.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use twofloat::TwoFloat;

/// Real floating-point scalar usable by the Gaussian-state routines.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Short name used in CLI output and provenance records.
    const NAME: &'static str;

    /// Unit roundoff of the arithmetic (distance from 1 to the next value).
    fn unit_roundoff() -> Self;

    /// Converts an `f64` literal. Every supported type can represent the
    /// nearest value, so this never fails.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Sum of an iterator; `TwoFloat` has no `Sum` impl.
    #[inline]
    fn sum_iter<I: IntoIterator<Item = Self>>(it: I) -> Self {
        it.into_iter().fold(Self::zero(), |acc, x| acc + x)
    }
}

impl Real for f32 {
    const NAME: &'static str = "f32";

    #[inline]
    fn unit_roundoff() -> Self {
        f32::EPSILON
    }
}

impl Real for f64 {
    const NAME: &'static str = "f64";

    #[inline]
    fn unit_roundoff() -> Self {
        f64::EPSILON
    }
}

impl Real for TwoFloat {
    const NAME: &'static str = "double-double";

    // `TwoFloat::EPSILON` is the smallest positive normal, not a roundoff.
    #[inline]
    fn unit_roundoff() -> Self {
        TwoFloat::from(f64::EPSILON * f64::EPSILON)
    }

    // The blanket `FromPrimitive::from_f64` truncates through `i64`.
    #[inline]
    fn lit(x: f64) -> Self {
        TwoFloat::from(x)
    }
}

/// Free-function form of [`Real::sum_iter`].
pub fn sum<T: Real>(values: impl IntoIterator<Item = T>) -> T {
    T::sum_iter(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundoff_is_tiny_but_nonzero() {
        assert!(f64::unit_roundoff() > 0.0);
        let dd = TwoFloat::unit_roundoff();
        assert!(dd.as_f64() > 0.0 && dd.as_f64() < 1e-30);
        let one = TwoFloat::lit(1.0);
        assert!(one + dd > one);
    }

    #[test]
    fn sum_iter_matches_fold() {
        let v = [TwoFloat::lit(0.25), TwoFloat::lit(0.5), TwoFloat::lit(1.0)];
        assert_eq!(sum(v).as_f64(), 1.75);
    }
}
