//! Internal exact rational scalar with a machine-word fast path.
//!
//! Simplex tableaus on this problem family keep entries tiny, so the
//! common case is an `i64/i64` fraction; results that cannot be reduced
//! back into word range promote losslessly to `BigRational`. All
//! arithmetic stays exact either way.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::rational::Rat;

#[derive(Clone, Debug)]
pub(crate) enum Scalar {
    /// Reduced fraction `n/d` with `d > 0`.
    Small { n: i64, d: i64 },
    Big(Box<BigRational>),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Small { n: 0, d: 1 }
    }

    pub fn one() -> Self {
        Scalar::Small { n: 1, d: 1 }
    }

    pub fn from_rat(r: &Rat) -> Self {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) => Scalar::Small { n, d },
            _ => Scalar::Big(Box::new(BigRational::new(r.numer().clone(), r.denom().clone()))),
        }
    }

    pub fn to_rat(&self) -> Rat {
        match self {
            Scalar::Small { n, d } => {
                let num = BigInt::from(*n);
                let den = BigInt::from(*d);
                Rat::from_bigint(num) / Rat::from_bigint(den)
            }
            Scalar::Big(b) => {
                Rat::from_bigint(b.numer().clone()) / Rat::from_bigint(b.denom().clone())
            }
        }
    }

    fn to_big(&self) -> BigRational {
        match self {
            Scalar::Small { n, d } => BigRational::new(BigInt::from(*n), BigInt::from(*d)),
            Scalar::Big(b) => (**b).clone(),
        }
    }

    /// Reduce `n/d` (both i128, `d != 0`) and demote to words if possible.
    fn normalized(mut n: i128, mut d: i128) -> Self {
        debug_assert!(d != 0);
        if d < 0 {
            n = -n;
            d = -d;
        }
        if n == 0 {
            return Scalar::zero();
        }
        let g = n.unsigned_abs().gcd(&d.unsigned_abs());
        if g > 1 {
            n /= g as i128;
            d /= g as i128;
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(n), Ok(d)) => Scalar::Small { n, d },
            _ => Scalar::Big(Box::new(BigRational::new(BigInt::from(n), BigInt::from(d)))),
        }
    }

    fn from_big(b: BigRational) -> Self {
        match (b.numer().to_i64(), b.denom().to_i64()) {
            (Some(n), Some(d)) => Scalar::Small { n, d },
            _ => Scalar::Big(Box::new(b)),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Small { n, .. } => *n == 0,
            Scalar::Big(b) => b.is_zero(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Scalar::Small { n, .. } => *n < 0,
            Scalar::Big(b) => b.is_negative(),
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Scalar::Small { n, .. } => *n > 0,
            Scalar::Big(b) => b.is_positive(),
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Scalar::Small { n: 1, d: 1 })
            || matches!(self, Scalar::Big(b) if **b == BigRational::new(BigInt::from(1), BigInt::from(1)))
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Small { n, d } if *n != i64::MIN => Scalar::Small { n: -n, d: *d },
            other => Scalar::from_big(-other.to_big()),
        }
    }

    pub fn add(&self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Small { n: a, d: b }, Scalar::Small { n: c, d: e }) => {
                let n = *a as i128 * *e as i128 + *c as i128 * *b as i128;
                let d = *b as i128 * *e as i128;
                Scalar::normalized(n, d)
            }
            _ => Scalar::from_big(self.to_big() + rhs.to_big()),
        }
    }

    pub fn sub(&self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Small { n: a, d: b }, Scalar::Small { n: c, d: e }) => {
                let n = *a as i128 * *e as i128 - *c as i128 * *b as i128;
                let d = *b as i128 * *e as i128;
                Scalar::normalized(n, d)
            }
            _ => Scalar::from_big(self.to_big() - rhs.to_big()),
        }
    }

    pub fn mul(&self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Small { n: a, d: b }, Scalar::Small { n: c, d: e }) => {
                Scalar::normalized(*a as i128 * *c as i128, *b as i128 * *e as i128)
            }
            _ => Scalar::from_big(self.to_big() * rhs.to_big()),
        }
    }

    pub fn div(&self, rhs: &Scalar) -> Scalar {
        assert!(!rhs.is_zero(), "division by zero");
        match (self, rhs) {
            (Scalar::Small { n: a, d: b }, Scalar::Small { n: c, d: e }) => {
                Scalar::normalized(*a as i128 * *e as i128, *b as i128 * *c as i128)
            }
            _ => Scalar::from_big(self.to_big() / rhs.to_big()),
        }
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scalar {}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Scalar::Small { n: a, d: b }, Scalar::Small { n: c, d: e }) => {
                (*a as i128 * *e as i128).cmp(&(*c as i128 * *b as i128))
            }
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: i64, d: i64) -> Scalar {
        Scalar::normalized(n as i128, d as i128)
    }

    #[test]
    fn small_arithmetic_reduces() {
        assert_eq!(s(1, 3).add(&s(1, 6)), s(1, 2));
        assert_eq!(s(2, 4), s(1, 2));
        assert_eq!(s(1, 2).mul(&s(2, 3)), s(1, 3));
        assert_eq!(s(1, 2).div(&s(3, 2)), s(1, 3));
        assert!(s(-1, 2).is_negative());
        assert_eq!(s(5, -10), s(-1, 2));
    }

    #[test]
    fn promotes_on_overflow_and_stays_exact() {
        let big = Scalar::Small { n: i64::MAX, d: 1 };
        let sum = big.add(&big);
        assert!(matches!(sum, Scalar::Big(_)));
        let back = sum.sub(&big);
        // Demotes to the word representation once it fits again.
        assert!(matches!(back, Scalar::Small { .. }));
        assert_eq!(back, big);
    }

    #[test]
    fn round_trip_with_rat() {
        for r in [Rat::new(7, 3), Rat::from_int(-4), Rat::zero()] {
            assert_eq!(Scalar::from_rat(&r).to_rat(), r);
        }
        let huge: Rat = "123456789012345678901234567890/7".parse().unwrap();
        let sc = Scalar::from_rat(&huge);
        assert!(matches!(sc, Scalar::Big(_)));
        assert_eq!(sc.to_rat(), huge);
    }

    #[test]
    fn ordering() {
        assert!(s(1, 3) < s(1, 2));
        assert!(s(-1, 2) < Scalar::zero());
        assert_eq!(s(2, 6).cmp(&s(1, 3)), Ordering::Equal);
    }
}
