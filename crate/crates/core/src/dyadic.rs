//! Fixed-precision dyadic floats: `m · 2^e` with a big-integer mantissa
//! rounded to [`PREC`] bits after every operation.
//!
//! This is the numeric workhorse of the eigensolver.  Double precision is not
//! enough there — the Gram matrices of high-degree simplex bases have
//! condition numbers far beyond 10^30, so factorizations in `f64` lose every
//! significant digit.  These floats are deterministic (no environment-
//! dependent rounding), support exact power-of-two scaling, and convert to
//! decimal strings without round-tripping through `f64`.
//!
//! Accuracy contract: every operation returns a value with relative error at
//! most a few units in the last of [`PREC`] bits.  Nothing downstream relies
//! on tighter semantics — final certificates are re-verified in exact rational
//! arithmetic.

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Working mantissa precision in bits (~96 decimal digits).
pub const PREC: u64 = 320;

/// A dyadic float `m · 2^e`; zero is canonically `(0, 0)`.
#[derive(Clone, Debug)]
pub struct Df {
    m: BigInt,
    e: i64,
}

// ---- construction ----------------------------------------------------------

impl Df {
    pub fn zero() -> Self {
        Df { m: BigInt::zero(), e: 0 }
    }

    pub fn one() -> Self {
        Df { m: BigInt::one(), e: 0 }
    }

    pub fn from_int(v: i64) -> Self {
        normalize(BigInt::from(v), 0)
    }

    pub fn from_bigint(v: &BigInt) -> Self {
        normalize(v.clone(), 0)
    }

    /// Rounded quotient of two big integers.
    pub fn from_ratio(num: &BigInt, den: &BigInt) -> Self {
        assert!(!den.is_zero(), "dyadic ratio with zero denominator");
        div_raw(num.clone(), 0, den.clone(), 0)
    }

    pub fn from_rational(r: &BigRational) -> Self {
        Self::from_ratio(r.numer(), r.denom())
    }

    /// Exact embedding of a finite `f64` (every finite float is dyadic).
    pub fn from_f64(v: f64) -> Option<Self> {
        BigRational::from_float(v).map(|r| Self::from_rational(&r))
    }

    // ---- queries -----------------------------------------------------------

    pub fn is_zero(&self) -> bool {
        self.m.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.m.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.m.is_positive()
    }

    /// Position of the top bit: the value `v` satisfies `2^(hi-1) ≤ |v| < 2^hi`.
    fn hi(&self) -> i64 {
        debug_assert!(!self.m.is_zero());
        self.m.magnitude().bits() as i64 + self.e
    }

    // ---- arithmetic helpers ------------------------------------------------

    pub fn abs(&self) -> Df {
        Df { m: self.m.abs(), e: self.e }
    }

    /// Exact multiplication by `2^shift`.
    pub fn ldexp(&self, shift: i64) -> Df {
        if self.m.is_zero() {
            Df::zero()
        } else {
            Df { m: self.m.clone(), e: self.e + shift }
        }
    }

    /// Rounded square root; panics on negative input (callers check sign).
    pub fn sqrt(&self) -> Df {
        assert!(!self.m.is_negative(), "dyadic sqrt of negative value");
        if self.m.is_zero() {
            return Df::zero();
        }
        let bits = self.m.magnitude().bits();
        let target = 2 * PREC + 4;
        let mut s = target.saturating_sub(bits) as i64;
        if (self.e - s) % 2 != 0 {
            s += 1;
        }
        let scaled: BigUint = self.m.magnitude() << s;
        let root = num_integer::Roots::sqrt(&scaled);
        normalize(BigInt::from(root), (self.e - s) / 2)
    }

    /// Exact three-way comparison of the represented values.
    pub fn cmp_val(&self, other: &Df) -> Ordering {
        // Subtraction is sign-exact here: alignment is exact, the negligible-
        // operand shortcut keeps the dominant sign, and rounding never flips it.
        let d = self - other;
        if d.m.is_zero() {
            Ordering::Equal
        } else if d.m.is_negative() {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }

    // ---- conversions -------------------------------------------------------

    pub fn to_f64(&self) -> f64 {
        if self.m.is_zero() {
            return 0.0;
        }
        let bits = self.m.magnitude().bits();
        let (top, shift) = if bits > 53 {
            (&self.m >> (bits - 53), (bits - 53) as i64)
        } else {
            (self.m.clone(), 0)
        };
        let exp = (self.e + shift).clamp(-4000, 4000) as i32;
        top.to_f64().unwrap_or(f64::NAN) * 2f64.powi(exp)
    }

    /// Deterministic fixed-point decimal rendering with `digits` places,
    /// rounded half away from zero.
    pub fn to_decimal(&self, digits: usize) -> String {
        let neg = self.m.is_negative();
        let mag = self.m.magnitude().clone();
        let scaled: BigUint = mag * BigUint::from(10u32).pow(digits as u32);
        let val: BigUint = if self.e >= 0 {
            scaled << self.e
        } else {
            let down = (-self.e) as u64;
            let half = BigUint::one() << (down - 1);
            (scaled + half) >> down
        };
        let mut s = val.to_str_radix(10);
        if s.len() <= digits {
            s = format!("{}{}", "0".repeat(digits + 1 - s.len()), s);
        }
        let point = s.len() - digits;
        let (int_part, frac_part) = s.split_at(point);
        let sign = if neg && !val.is_zero() { "-" } else { "" };
        if digits == 0 {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac_part}")
        }
    }
}

/// Parses a plain decimal literal (`-12.345`) into an exact rational.
pub fn parse_decimal_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let bad = || Error::InvalidParam(format!("malformed decimal literal: {s:?}"));
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, t.strip_prefix('+').unwrap_or(t)),
    };
    if body.is_empty() {
        return Err(bad());
    }
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = digits.parse().map_err(|_| bad())?;
    let den = BigInt::from(10u32).pow(frac_part.len() as u32);
    Ok(BigRational::new(num * BigInt::from(sign), den))
}

// ---- normalization ---------------------------------------------------------

/// Rounds `m · 2^e` to at most [`PREC`] mantissa bits, half away from zero.
fn normalize(m: BigInt, mut e: i64) -> Df {
    if m.is_zero() {
        return Df::zero();
    }
    let bits = m.magnitude().bits();
    if bits <= PREC {
        return Df { m, e };
    }
    let shift = bits - PREC;
    let neg = m.sign() == Sign::Minus;
    let mag = m.into_parts().1;
    let mut kept: BigUint = &mag >> shift;
    let rem: BigUint = mag - (&kept << shift);
    let half = BigUint::one() << (shift - 1);
    if rem >= half {
        kept += 1u32;
        if kept.bits() > PREC {
            // Carried into a new bit (kept is now a power of two).
            kept >>= 1;
            e += 1;
        }
    }
    e += shift as i64;
    let m = BigInt::from_biguint(if neg { Sign::Minus } else { Sign::Plus }, kept);
    Df { m, e }
}

fn add_raw(a: &Df, b: &Df) -> Df {
    if a.m.is_zero() {
        return b.clone();
    }
    if b.m.is_zero() {
        return a.clone();
    }
    // An operand entirely below the other's rounding ulp cannot move it.
    let (ha, hb) = (a.hi(), b.hi());
    let guard = PREC as i64 + 2;
    if ha - hb > guard {
        return a.clone();
    }
    if hb - ha > guard {
        return b.clone();
    }
    let e = a.e.min(b.e);
    let m = (&a.m << (a.e - e) as u64) + (&b.m << (b.e - e) as u64);
    normalize(m, e)
}

fn div_raw(an: BigInt, ae: i64, bn: BigInt, be: i64) -> Df {
    if an.is_zero() {
        return Df::zero();
    }
    let s = (PREC + 2 + bn.magnitude().bits()).saturating_sub(an.magnitude().bits()) as i64;
    let q = (an << s as u64).div_floor(&bn);
    normalize(q, ae - be - s)
}

// ---- operators -------------------------------------------------------------

impl Add for &Df {
    type Output = Df;
    fn add(self, rhs: &Df) -> Df {
        add_raw(self, rhs)
    }
}

impl Sub for &Df {
    type Output = Df;
    fn sub(self, rhs: &Df) -> Df {
        add_raw(self, &-rhs)
    }
}

impl Mul for &Df {
    type Output = Df;
    fn mul(self, rhs: &Df) -> Df {
        if self.m.is_zero() || rhs.m.is_zero() {
            return Df::zero();
        }
        normalize(&self.m * &rhs.m, self.e + rhs.e)
    }
}

impl Div for &Df {
    type Output = Df;
    fn div(self, rhs: &Df) -> Df {
        assert!(!rhs.m.is_zero(), "dyadic division by zero");
        div_raw(self.m.clone(), self.e, rhs.m.clone(), rhs.e)
    }
}

impl Neg for &Df {
    type Output = Df;
    fn neg(self) -> Df {
        Df { m: -self.m.clone(), e: self.e }
    }
}

impl PartialEq for Df {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_val(other) == Ordering::Equal
    }
}

impl PartialOrd for Df {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_val(other))
    }
}

// ---- tests -----------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn thirds_sum_to_one() {
        let third = Df::from_ratio(&BigInt::one(), &BigInt::from(3));
        let sum = &(&third + &third) + &third;
        let err = (&sum - &Df::one()).abs();
        assert!(err < Df::one().ldexp(-300));
    }

    #[test]
    fn sqrt_squares_back() {
        let two = Df::from_int(2);
        let r = two.sqrt();
        let err = (&(&r * &r) - &two).abs();
        assert!(err < Df::one().ldexp(-310));
    }

    #[test]
    fn sqrt_decimal_is_consistent() {
        let r = Df::from_int(2).sqrt();
        let s = r.to_decimal(50);
        let back = parse_decimal_rational(&s).unwrap();
        let err = (&back * &back - rat(2, 1)).abs();
        assert!(err < rat(1, 1_000_000_000) * rat(1, 10_i64.pow(18)) * rat(1, 10_i64.pow(18)));
    }

    #[test]
    fn division_round_trips() {
        let x = Df::from_ratio(&BigInt::from(355), &BigInt::from(113));
        let y = Df::from_int(7).sqrt();
        let z = &(&x / &y) * &y;
        assert!((&z - &x).abs() < x.abs().ldexp(-300));
    }

    #[test]
    fn comparisons_are_exact() {
        let a = Df::from_ratio(&BigInt::one(), &BigInt::from(3));
        let b = Df::from_ratio(&BigInt::one(), &BigInt::from(2));
        assert!(a < b);
        assert!(Df::from_int(4) == Df::from_int(1).ldexp(2));
        assert!(Df::from_int(-1) < Df::zero());
        // Widely separated magnitudes take the shortcut path.
        assert!(Df::one().ldexp(-4000) < Df::one());
        assert!(-&Df::one().ldexp(-4000) < Df::zero());
    }

    #[test]
    fn decimal_rendering_fixed_cases() {
        assert_eq!(Df::from_ratio(&BigInt::one(), &BigInt::from(8)).to_decimal(4), "0.1250");
        assert_eq!(Df::from_ratio(&BigInt::from(-3), &BigInt::from(2)).to_decimal(3), "-1.500");
        assert_eq!(Df::from_int(42).to_decimal(0), "42");
        assert_eq!(Df::zero().to_decimal(2), "0.00");
    }

    #[test]
    fn decimal_rendering_is_deterministic() {
        let a = Df::from_int(2).sqrt().to_decimal(80);
        let b = Df::from_int(2).sqrt().to_decimal(80);
        assert_eq!(a, b);
        assert_eq!(a.len(), 82); // "1." + 80 digits
    }

    #[test]
    fn parse_decimal_cases() {
        assert_eq!(parse_decimal_rational("-12.345").unwrap(), rat(-2469, 200));
        assert_eq!(parse_decimal_rational("4").unwrap(), rat(4, 1));
        assert_eq!(parse_decimal_rational("0.5").unwrap(), rat(1, 2));
        assert!(parse_decimal_rational("1.2.3").is_err());
        assert!(parse_decimal_rational("abc").is_err());
        assert!(parse_decimal_rational("").is_err());
    }

    #[test]
    fn to_f64_spot_checks() {
        assert_eq!(Df::from_int(5).to_f64(), 5.0);
        let third = Df::from_ratio(&BigInt::one(), &BigInt::from(3));
        assert!((third.to_f64() - 1.0 / 3.0).abs() < 1e-15);
        assert!((Df::from_int(2).sqrt().to_f64() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn negligible_addend_is_dropped_not_crashed() {
        let big = Df::one();
        let tiny = Df::one().ldexp(-1_000_000);
        let sum = &big + &tiny;
        assert!(sum == big);
    }
}
