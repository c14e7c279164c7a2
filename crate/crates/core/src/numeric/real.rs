//! The scalar trait the generic numeric kernels are written against.

use num_traits::{Num, NumCast};
use std::fmt::Debug;
use std::ops::Neg;

/// Real scalar with the handful of operations the numeric kernels need.
///
/// Implemented for `f32`, `f64` and the double-double type [`super::Dd`].
/// Only ring operations plus `abs`/`sqrt` and conversions are required, so
/// an exact-compensated implementation stays exact: no transcendental
/// functions leak into the generic code paths.
pub trait Real:
    Copy + Clone + Debug + PartialEq + PartialOrd + Num + Neg<Output = Self> + 'static
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    /// Unit roundoff of the representation.
    fn eps() -> Self;

    fn max_val(self, other: Self) -> Self {
        if self > other {
            self
        } else {
            other
        }
    }

    fn min_val(self, other: Self) -> Self {
        if self < other {
            self
        } else {
            other
        }
    }
}

macro_rules! impl_real_for_float {
    ($t:ty, $eps:expr) => {
        impl Real for $t {
            fn from_f64(x: f64) -> Self {
                <$t as NumCast>::from(x).expect("finite f64 converts")
            }
            fn to_f64(self) -> f64 {
                self as f64
            }
            fn abs(self) -> Self {
                <$t>::abs(self)
            }
            fn sqrt(self) -> Self {
                <$t>::sqrt(self)
            }
            fn eps() -> Self {
                $eps
            }
        }
    };
}

impl_real_for_float!(f32, f32::EPSILON);
impl_real_for_float!(f64, f64::EPSILON);
