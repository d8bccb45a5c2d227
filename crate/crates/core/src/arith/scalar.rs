//! Exact rational scalars.
//!
//! Values are kept in lowest terms with a positive denominator. Small values
//! live inline as a pair of `i64`; anything that does not fit is promoted to a
//! [`BigRational`] and demoted again as soon as it fits. The representation is
//! canonical, so derived equality and hashing are structural.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    Small { num: i64, den: i64 },
    Big(Box<BigRational>),
}

/// An exact rational number.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExactScalar(Repr);

#[inline]
fn fits(v: i128) -> bool {
    v > i64::MIN as i128 && v <= i64::MAX as i128
}

impl ExactScalar {
    pub const fn zero() -> Self {
        ExactScalar(Repr::Small { num: 0, den: 1 })
    }

    pub const fn one() -> Self {
        ExactScalar(Repr::Small { num: 1, den: 1 })
    }

    pub const fn from_int(v: i64) -> Self {
        // i64::MIN is excluded from the inline range so negation never overflows.
        if v == i64::MIN {
            panic!("ExactScalar::from_int: i64::MIN is not supported")
        }
        ExactScalar(Repr::Small { num: v, den: 1 })
    }

    /// `num / den`; panics on a zero denominator.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::from_i128(num as i128, den as i128)
    }

    fn from_i128(mut num: i128, mut den: i128) -> Self {
        debug_assert!(den != 0);
        if den < 0 {
            num = -num;
            den = -den;
        }
        if den != 1 {
            let g = num.gcd(&den);
            if g > 1 {
                num /= g;
                den /= g;
            }
        }
        if fits(num) && fits(den) {
            ExactScalar(Repr::Small {
                num: num as i64,
                den: den as i64,
            })
        } else {
            Self::from_big(BigRational::new(BigInt::from(num), BigInt::from(den)))
        }
    }

    fn from_int_i128(num: i128) -> Self {
        if fits(num) {
            ExactScalar(Repr::Small {
                num: num as i64,
                den: 1,
            })
        } else {
            ExactScalar(Repr::Big(Box::new(BigRational::from_integer(BigInt::from(
                num,
            )))))
        }
    }

    /// Builds a scalar from an already reduced big rational, demoting when it fits.
    pub fn from_big(r: BigRational) -> Self {
        if let (Some(n), Some(d)) = (r.numer().to_i64(), r.denom().to_i64()) {
            if n != i64::MIN && d != i64::MIN {
                return ExactScalar(Repr::Small { num: n, den: d });
            }
        }
        ExactScalar(Repr::Big(Box::new(r)))
    }

    pub fn from_bigint(v: BigInt) -> Self {
        Self::from_big(BigRational::from_integer(v))
    }

    pub fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small { num, den } => BigRational::new_raw(BigInt::from(*num), BigInt::from(*den)),
            Repr::Big(b) => (**b).clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small { num, .. } => BigInt::from(*num),
            Repr::Big(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small { den, .. } => BigInt::from(*den),
            Repr::Big(b) => b.denom().clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small { num: 0, .. })
    }

    pub fn is_one(&self) -> bool {
        matches!(self.0, Repr::Small { num: 1, den: 1 })
    }

    pub fn signum(&self) -> i32 {
        match &self.0 {
            Repr::Small { num, .. } => num.signum() as i32,
            Repr::Big(b) => {
                if b.is_positive() {
                    1
                } else if b.is_negative() {
                    -1
                } else {
                    0
                }
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small { den, .. } => *den == 1,
            Repr::Big(b) => b.is_integer(),
        }
    }

    /// The value as an `i64` when it is an integer that fits.
    pub fn to_i64(&self) -> Option<i64> {
        match &self.0 {
            Repr::Small { num, den: 1 } => Some(*num),
            _ => None,
        }
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        Some(match &self.0 {
            Repr::Small { num, den } => Self::from_i128(*den as i128, *num as i128),
            Repr::Big(b) => Self::from_big(b.recip()),
        })
    }

    pub fn floor(&self) -> Self {
        match &self.0 {
            Repr::Small { num, den } => {
                ExactScalar(Repr::Small {
                    num: num.div_floor(den),
                    den: 1,
                })
            }
            Repr::Big(b) => Self::from_big(b.floor()),
        }
    }

    pub fn ceil(&self) -> Self {
        -(-self).floor()
    }

    /// Nearest integer, halves rounded up.
    pub fn round_half_up(&self) -> Self {
        (self + &ExactScalar::ratio(1, 2)).floor()
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = ExactScalar::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Default for ExactScalar {
    fn default() -> Self {
        ExactScalar::zero()
    }
}

impl From<i64> for ExactScalar {
    fn from(v: i64) -> Self {
        ExactScalar::from_int(v)
    }
}

impl From<i32> for ExactScalar {
    fn from(v: i32) -> Self {
        ExactScalar::from_int(v as i64)
    }
}

impl From<BigInt> for ExactScalar {
    fn from(v: BigInt) -> Self {
        ExactScalar::from_bigint(v)
    }
}

impl From<BigRational> for ExactScalar {
    fn from(v: BigRational) -> Self {
        ExactScalar::from_big(v)
    }
}

fn add_impl(a: &ExactScalar, b: &ExactScalar) -> ExactScalar {
    match (&a.0, &b.0) {
        (Repr::Small { num: an, den: ad }, Repr::Small { num: bn, den: bd }) => {
            if *ad == 1 && *bd == 1 {
                ExactScalar::from_int_i128(*an as i128 + *bn as i128)
            } else if ad == bd {
                ExactScalar::from_i128(*an as i128 + *bn as i128, *ad as i128)
            } else {
                let num = *an as i128 * *bd as i128 + *bn as i128 * *ad as i128;
                ExactScalar::from_i128(num, *ad as i128 * *bd as i128)
            }
        }
        _ => ExactScalar::from_big(a.to_big() + b.to_big()),
    }
}

fn sub_impl(a: &ExactScalar, b: &ExactScalar) -> ExactScalar {
    match (&a.0, &b.0) {
        (Repr::Small { num: an, den: ad }, Repr::Small { num: bn, den: bd }) => {
            if *ad == 1 && *bd == 1 {
                ExactScalar::from_int_i128(*an as i128 - *bn as i128)
            } else if ad == bd {
                ExactScalar::from_i128(*an as i128 - *bn as i128, *ad as i128)
            } else {
                let num = *an as i128 * *bd as i128 - *bn as i128 * *ad as i128;
                ExactScalar::from_i128(num, *ad as i128 * *bd as i128)
            }
        }
        _ => ExactScalar::from_big(a.to_big() - b.to_big()),
    }
}

fn mul_impl(a: &ExactScalar, b: &ExactScalar) -> ExactScalar {
    match (&a.0, &b.0) {
        (Repr::Small { num: an, den: ad }, Repr::Small { num: bn, den: bd }) => {
            if *ad == 1 && *bd == 1 {
                ExactScalar::from_int_i128(*an as i128 * *bn as i128)
            } else {
                ExactScalar::from_i128(*an as i128 * *bn as i128, *ad as i128 * *bd as i128)
            }
        }
        _ => ExactScalar::from_big(a.to_big() * b.to_big()),
    }
}

fn div_impl(a: &ExactScalar, b: &ExactScalar) -> ExactScalar {
    assert!(!b.is_zero(), "division by zero");
    match (&a.0, &b.0) {
        (Repr::Small { num: an, den: ad }, Repr::Small { num: bn, den: bd }) => {
            ExactScalar::from_i128(*an as i128 * *bd as i128, *ad as i128 * *bn as i128)
        }
        _ => ExactScalar::from_big(a.to_big() / b.to_big()),
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $imp:ident) => {
        impl $tr<&ExactScalar> for &ExactScalar {
            type Output = ExactScalar;
            #[inline]
            fn $method(self, rhs: &ExactScalar) -> ExactScalar {
                $imp(self, rhs)
            }
        }
        impl $tr<ExactScalar> for ExactScalar {
            type Output = ExactScalar;
            #[inline]
            fn $method(self, rhs: ExactScalar) -> ExactScalar {
                $imp(&self, &rhs)
            }
        }
        impl $tr<&ExactScalar> for ExactScalar {
            type Output = ExactScalar;
            #[inline]
            fn $method(self, rhs: &ExactScalar) -> ExactScalar {
                $imp(&self, rhs)
            }
        }
        impl $tr<ExactScalar> for &ExactScalar {
            type Output = ExactScalar;
            #[inline]
            fn $method(self, rhs: ExactScalar) -> ExactScalar {
                $imp(self, &rhs)
            }
        }
    };
}

binop!(Add, add, add_impl);
binop!(Sub, sub, sub_impl);
binop!(Mul, mul, mul_impl);
binop!(Div, div, div_impl);

impl AddAssign<&ExactScalar> for ExactScalar {
    fn add_assign(&mut self, rhs: &ExactScalar) {
        *self = add_impl(self, rhs);
    }
}

impl AddAssign<ExactScalar> for ExactScalar {
    fn add_assign(&mut self, rhs: ExactScalar) {
        *self = add_impl(self, &rhs);
    }
}

impl SubAssign<&ExactScalar> for ExactScalar {
    fn sub_assign(&mut self, rhs: &ExactScalar) {
        *self = sub_impl(self, rhs);
    }
}

impl MulAssign<&ExactScalar> for ExactScalar {
    fn mul_assign(&mut self, rhs: &ExactScalar) {
        *self = mul_impl(self, rhs);
    }
}

impl Neg for &ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        match &self.0 {
            Repr::Small { num, den } => ExactScalar(Repr::Small {
                num: -num,
                den: *den,
            }),
            Repr::Big(b) => ExactScalar::from_big(-(**b).clone()),
        }
    }
}

impl Neg for ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        -&self
    }
}

impl<'a> Sum<&'a ExactScalar> for ExactScalar {
    fn sum<I: Iterator<Item = &'a ExactScalar>>(iter: I) -> Self {
        iter.fold(ExactScalar::zero(), |acc, x| acc + x)
    }
}

impl Sum<ExactScalar> for ExactScalar {
    fn sum<I: Iterator<Item = ExactScalar>>(iter: I) -> Self {
        iter.fold(ExactScalar::zero(), |acc, x| acc + x)
    }
}

impl PartialOrd for ExactScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small { num: an, den: ad }, Repr::Small { num: bn, den: bd }) => {
                if ad == bd {
                    an.cmp(bn)
                } else {
                    (*an as i128 * *bd as i128).cmp(&(*bn as i128 * *ad as i128))
                }
            }
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small { num, den: 1 } => write!(f, "{num}"),
            Repr::Small { num, den } => write!(f, "{num}/{den}"),
            Repr::Big(b) if b.is_integer() => write!(f, "{}", b.numer()),
            Repr::Big(b) => write!(f, "{}/{}", b.numer(), b.denom()),
        }
    }
}

impl fmt::Debug for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for ExactScalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || Error::Parse(format!("invalid rational `{s}`"));
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), Some(d.trim())),
            None => (s, None),
        };
        let num: BigInt = n.parse().map_err(|_| bad())?;
        let den: BigInt = match d {
            Some(d) => d.parse().map_err(|_| bad())?,
            None => BigInt::one(),
        };
        if den.is_zero() {
            return Err(bad());
        }
        Ok(ExactScalar::from_big(BigRational::new(num, den)))
    }
}

impl Serialize for ExactScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExactScalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> ExactScalar {
        ExactScalar::ratio(n, d)
    }

    #[test]
    fn lowest_terms_and_display() {
        assert_eq!(q(2, 4), q(1, 2));
        assert_eq!(q(3, -6).to_string(), "-1/2");
        assert_eq!(q(4, 2).to_string(), "2");
        assert_eq!(q(1, 4) + q(1, 4), q(1, 2));
        assert_eq!("6/-4".parse::<ExactScalar>().unwrap(), q(-3, 2));
        assert!("1/0".parse::<ExactScalar>().is_err());
        assert!("x".parse::<ExactScalar>().is_err());
    }

    #[test]
    fn promotes_and_demotes() {
        let big = ExactScalar::from_int(i64::MAX);
        let sq = &big * &big;
        assert!(matches!(sq.0, Repr::Big(_)));
        let back = &sq / &big;
        assert!(matches!(back.0, Repr::Small { .. }));
        assert_eq!(back, big);
        let s = sq.to_string();
        assert_eq!(s.parse::<ExactScalar>().unwrap(), sq);
    }

    #[test]
    fn rounding() {
        assert_eq!(q(-1, 2).floor(), ExactScalar::from_int(-1));
        assert_eq!(q(-1, 2).ceil(), ExactScalar::zero());
        assert_eq!(q(1, 2).round_half_up(), ExactScalar::one());
        assert_eq!(q(-3, 2).round_half_up(), ExactScalar::from_int(-1));
        assert_eq!(q(7, 3).round_half_up(), ExactScalar::from_int(2));
    }

    proptest! {
        #[test]
        fn field_laws(a in -1000i64..1000, b in 1i64..1000, c in -1000i64..1000, d in 1i64..1000) {
            let x = q(a, b);
            let y = q(c, d);
            prop_assert_eq!(&(&x + &y) - &y, x.clone());
            if !y.is_zero() {
                prop_assert_eq!(&(&x * &y) / &y, x.clone());
            }
            let lhs = (x.clone() < y.clone()) as i32;
            let rhs = ((a as i128 * d as i128) < (c as i128 * b as i128)) as i32;
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn big_path_agrees(a in any::<i64>(), b in 1i64..i64::MAX, c in any::<i64>()) {
            prop_assume!(a != i64::MIN && c != i64::MIN);
            let x = q(a, b);
            let y = ExactScalar::from_int(c);
            let sum = &x * &y + &y;
            let expect = x.to_big() * y.to_big() + y.to_big();
            prop_assert_eq!(sum.to_big(), expect);
        }
    }
}
