//! Double-double arithmetic: an unevaluated sum of two `f64`s giving
//! roughly 32 significant decimal digits.
//!
//! Used as the high-precision lane of the generic numeric kernels: the
//! independent re-evaluation oracle for polynomial evaluation and the
//! fallback scalar for ill-conditioned Sylvester eliminations. Only field
//! operations, comparisons and square roots are provided; that is all the
//! generic code requires.

use super::Real;
use num_traits::{Num, One, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

/// `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Default)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// Requires `|a| >= |b|` (or a == 0).
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

impl Dd {
    pub const fn new(hi: f64, lo: f64) -> Self {
        Dd { hi, lo }
    }

    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn sqrt(self) -> Self {
        if self.hi == 0.0 && self.lo == 0.0 {
            return Dd::default();
        }
        assert!(self.hi > 0.0, "sqrt of negative double-double");
        // One dd-Newton correction on the f64 estimate recovers full width.
        let x = self.hi.sqrt();
        let xd = Dd::from_f64(x);
        let r = (self - xd * xd).hi / (2.0 * x);
        let (hi, lo) = quick_two_sum(x, r);
        Dd { hi, lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, rhs: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, rhs.hi);
        let (t1, t2) = two_sum(self.lo, rhs.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, rhs: Dd) -> Dd {
        self + (-rhs)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, rhs: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, rhs.hi);
        let p2 = p2 + self.hi * rhs.lo + self.lo * rhs.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * Dd::from_f64(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * Dd::from_f64(q2);
        let q3 = r.hi / rhs.hi;
        let (s, e) = quick_two_sum(q1, q2);
        let (hi, lo) = quick_two_sum(s, e + q3);
        Dd { hi, lo }
    }
}

impl Rem for Dd {
    type Output = Dd;
    fn rem(self, rhs: Dd) -> Dd {
        let q = (self / rhs).to_f64().trunc();
        self - rhs * Dd::from_f64(q)
    }
}

impl PartialEq for Dd {
    fn eq(&self, other: &Self) -> bool {
        self.hi == other.hi && self.lo == other.lo
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

impl Zero for Dd {
    fn zero() -> Self {
        Dd::default()
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }
}

impl One for Dd {
    fn one() -> Self {
        Dd::from_f64(1.0)
    }
}

impl Num for Dd {
    type FromStrRadixErr = std::num::ParseFloatError;
    /// Parses through `f64`, so literals keep only double precision.
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        f64::from_str_radix_compat(s, radix)
    }
}

trait FromStrRadixCompat {
    fn from_str_radix_compat(
        s: &str,
        radix: u32,
    ) -> Result<Dd, std::num::ParseFloatError>;
}

impl FromStrRadixCompat for f64 {
    fn from_str_radix_compat(
        s: &str,
        radix: u32,
    ) -> Result<Dd, std::num::ParseFloatError> {
        assert_eq!(radix, 10, "only radix 10 supported");
        s.parse::<f64>().map(Dd::from_f64)
    }
}

impl fmt::Debug for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dd({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

impl Real for Dd {
    fn from_f64(x: f64) -> Self {
        Dd::from_f64(x)
    }
    fn to_f64(self) -> f64 {
        Dd::to_f64(self)
    }
    fn abs(self) -> Self {
        Dd::abs(self)
    }
    fn sqrt(self) -> Self {
        Dd::sqrt(self)
    }
    fn eps() -> Self {
        // 2^-104
        Dd::from_f64(4.930380657631324e-32)
    }
}
