//! Rigorous base-2 logarithm enclosures with escalating precision.
//!
//! Used to decide comparisons of the form `x <=> B^e` when the exponent `e`
//! is a non-integer rational and the exact power is not representable.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::numeric::is_integer;

/// Starting and maximum working precision (bits) for log enclosures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Precision {
    pub start_bits: u32,
    pub cap_bits: u32,
}

pub const PRECISION_ENV: &str = "GCFX_PRECISION_BITS";

impl Default for Precision {
    fn default() -> Self {
        Precision {
            start_bits: 128,
            cap_bits: 1 << 16,
        }
    }
}

impl Precision {
    /// Default precision, with the start overridden by `GCFX_PRECISION_BITS`.
    pub fn from_env() -> Self {
        let mut p = Precision::default();
        if let Some(bits) = std::env::var(PRECISION_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<u32>().ok())
            .filter(|&b| b >= 8)
        {
            p.start_bits = bits.min(p.cap_bits);
        }
        p
    }

    fn levels(self) -> impl Iterator<Item = u32> {
        let cap = self.cap_bits.max(self.start_bits);
        std::iter::successors(Some(self.start_bits.max(8)), move |&b| {
            (b < cap).then(|| b.saturating_mul(2).min(cap))
        })
    }
}

/// Closed interval with exact rational endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Interval {
    pub fn point(x: BigRational) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        Interval {
            lo: &self.lo - &other.hi,
            hi: &self.hi - &other.lo,
        }
    }

    pub fn scale(&self, k: &BigRational) -> Interval {
        let a = &self.lo * k;
        let b = &self.hi * k;
        if k.is_negative() {
            Interval { lo: b, hi: a }
        } else {
            Interval { lo: a, hi: b }
        }
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    /// Ordering of every point of `self` against every point of `other`, if
    /// the intervals do not overlap.
    pub fn decide(&self, other: &Interval) -> Option<Ordering> {
        if self.hi < other.lo {
            Some(Ordering::Less)
        } else if self.lo > other.hi {
            Some(Ordering::Greater)
        } else if self.lo == self.hi && other.lo == other.hi && self.lo == other.lo {
            Some(Ordering::Equal)
        } else {
            None
        }
    }
}

fn shr_ceil(x: &BigUint, k: u64) -> BigUint {
    let q = x >> k;
    if (&q << k) == *x {
        q
    } else {
        q + 1u32
    }
}

/// Encloses `log2(n)` for `n >= 1`, with up to `prec` fractional bits.
///
/// Uses the square-and-compare digit recurrence on a fixed-point interval for
/// the mantissa; when rounding makes a digit ambiguous the recurrence stops
/// early and the returned interval is correspondingly wider.
pub fn log2_biguint(n: &BigUint, prec: u32) -> Interval {
    assert!(!n.is_zero(), "log2 of zero");
    let m = n.bits() - 1;
    let w = u64::from(prec) + 64;
    let (mut lo, mut hi) = if m >= w {
        let y = n >> (m - w);
        let exact = (&y << (m - w)) == *n;
        let hi = if exact { y.clone() } else { &y + 1u32 };
        (y, hi)
    } else {
        let y = n << (w - m);
        (y.clone(), y)
    };
    let two = BigUint::one() << (w + 1);
    let mut digits = BigUint::zero();
    let mut decided = 0u32;
    for _ in 0..prec {
        let lo2 = (&lo * &lo) >> w;
        let hi2 = shr_ceil(&(&hi * &hi), w);
        if hi2 < two {
            lo = lo2;
            hi = hi2;
            digits <<= 1u32;
        } else if lo2 >= two {
            lo = lo2 >> 1u32;
            hi = shr_ceil(&hi2, 1);
            digits = (digits << 1u32) + 1u32;
        } else {
            break;
        }
        decided += 1;
    }
    let scale = BigInt::one() << decided;
    let base = BigInt::from(m) * &scale;
    let digits = BigInt::from(digits);
    Interval {
        lo: BigRational::new(&base + &digits, scale.clone()),
        hi: BigRational::new(base + digits + 1, scale),
    }
}

/// Encloses `log2(x)` for a positive rational.
pub fn log2_rational(x: &BigRational, prec: u32) -> Interval {
    assert!(x.is_positive(), "log2 of non-positive value");
    let num = log2_biguint(x.numer().magnitude(), prec);
    if x.denom().is_one() {
        return num;
    }
    num.sub(&log2_biguint(x.denom().magnitude(), prec))
}

fn pow_big(base: &BigUint, exp: &BigUint) -> Option<BigUint> {
    let e = exp.to_u64()?;
    // refuse powers that would exceed ~2^26 bits
    if base.bits().saturating_mul(e) > (1 << 26) {
        return None;
    }
    Some(num_traits::pow(base.clone(), e as usize))
}

/// Exact `x <=> base^exp` when the power is small enough to materialize.
pub fn compare_power_exact(x: &BigRational, base: &BigUint, exp: &BigRational) -> Option<Ordering> {
    debug_assert!(x.is_positive() && !base.is_zero());
    if base.is_one() || exp.is_zero() {
        return Some(x.cmp(&BigRational::one()));
    }
    // x <=> base^(p/q)  <=>  x^q <=> base^p  (q > 0)
    let q = exp.denom().magnitude();
    let p = exp.numer();
    let xq_num = pow_big(x.numer().magnitude(), q)?;
    let xq_den = pow_big(x.denom().magnitude(), q)?;
    let bp = pow_big(base, p.magnitude())?;
    let (lhs, rhs) = if p.is_negative() {
        (xq_num * bp, xq_den)
    } else {
        (xq_num, xq_den * bp)
    };
    Some(lhs.cmp(&rhs))
}

/// Decides `x <=> base^exp` for `x > 0`, `base >= 1` and rational `exp`.
///
/// Integer exponents are compared exactly. Otherwise log2 enclosures are
/// tried at increasing precision, falling back to an exact comparison of
/// `x^q` against `base^p` whenever that fits in memory. Returns the last
/// precision tried when every level stays ambiguous.
pub fn compare_power(
    x: &BigRational,
    base: &BigUint,
    exp: &BigRational,
    precision: Precision,
) -> std::result::Result<Ordering, u32> {
    if is_integer(exp) || base.is_one() {
        if let Some(ord) = compare_power_exact(x, base, exp) {
            return Ok(ord);
        }
    }
    let mut last = precision.start_bits;
    let mut tried_exact = false;
    for bits in precision.levels() {
        last = bits;
        let lhs = log2_rational(x, bits);
        let rhs = log2_biguint(base, bits).scale(exp);
        if let Some(ord) = lhs.decide(&rhs) {
            return Ok(ord);
        }
        if !tried_exact {
            tried_exact = true;
            if let Some(ord) = compare_power_exact(x, base, exp) {
                return Ok(ord);
            }
        }
    }
    Err(last)
}

/// Ceiling of a positive rational.
pub fn ceil_rational(x: &BigRational) -> BigInt {
    x.numer().div_ceil(x.denom())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn contains(iv: &Interval, v: f64) -> bool {
        let lo = crate::numeric::rational_to_f64(&iv.lo);
        let hi = crate::numeric::rational_to_f64(&iv.hi);
        lo - 1e-12 <= v && v <= hi + 1e-12
    }

    #[test]
    fn log2_encloses_known_values() {
        for n in [1u64, 2, 3, 5, 7, 10, 1000, 123_456_789, u64::MAX] {
            let iv = log2_biguint(&BigUint::from(n), 64);
            assert!(contains(&iv, (n as f64).log2()), "n={n} {iv:?}");
            assert!(crate::numeric::rational_to_f64(&iv.width()) < 1e-15);
        }
        let big = BigUint::from(3u32) << 5000u32;
        let iv = log2_biguint(&big, 80);
        assert!(contains(&iv, 5000.0 + 3f64.log2()));
    }

    #[test]
    fn powers_of_two_are_tight() {
        let iv = log2_biguint(&(BigUint::one() << 77u32), 32);
        assert_eq!(iv.lo, q(77, 1));
        assert!(iv.hi > iv.lo);
    }

    #[test]
    fn rational_logs_subtract() {
        let iv = log2_rational(&q(3, 8), 64);
        assert!(contains(&iv, (0.375f64).log2()));
    }

    #[test]
    fn power_comparisons() {
        let p = Precision::default();
        let two = BigUint::from(2u32);
        // 3 vs 2^(3/2) = 2.828...
        assert_eq!(compare_power(&q(3, 1), &two, &q(3, 2), p), Ok(Ordering::Greater));
        assert_eq!(compare_power(&q(2, 1), &two, &q(3, 2), p), Ok(Ordering::Less));
        // exact tie: 2 = 4^(1/2)
        assert_eq!(
            compare_power(&q(2, 1), &BigUint::from(4u32), &q(1, 2), p),
            Ok(Ordering::Equal)
        );
        // negative exponents: 1/9 vs 3^-2
        assert_eq!(
            compare_power(&q(1, 9), &BigUint::from(3u32), &q(-2, 1), p),
            Ok(Ordering::Equal)
        );
        assert_eq!(
            compare_power(&q(1, 10), &BigUint::from(3u32), &q(-5, 2), p),
            Ok(Ordering::Greater)
        );
    }

    #[test]
    fn precision_levels_double_to_cap() {
        let p = Precision {
            start_bits: 128,
            cap_bits: 1024,
        };
        let levels: Vec<u32> = p.levels().collect();
        assert_eq!(levels, vec![128, 256, 512, 1024]);
    }
}
