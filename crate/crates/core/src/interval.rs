//! Interval scalars with exact rational endpoints.
//!
//! All certified comparisons in the crate reduce to arithmetic on these
//! enclosures.  Operations only ever widen by outward rounding, so any value
//! contained in the inputs is contained in the output.  There are no
//! floating-point fast paths.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::sync::RwLock;

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn rat_i64(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

/// 2^exp as an exact rational (exp may be negative).
pub fn pow2(exp: i64) -> Rat {
    if exp >= 0 {
        Rat::from_integer(BigInt::one() << exp as usize)
    } else {
        Rat::new(BigInt::one(), BigInt::one() << (-exp) as usize)
    }
}

fn shift_num(r: &Rat, bits: u32) -> (BigInt, &BigInt) {
    (r.numer() << bits as usize, r.denom())
}

/// Largest multiple of 2^-bits that is <= r.
pub fn dyadic_floor(r: &Rat, bits: u32) -> Rat {
    let (num, den) = shift_num(r, bits);
    Rat::new(num.div_floor(den), BigInt::one() << bits as usize)
}

/// Smallest multiple of 2^-bits that is >= r.
pub fn dyadic_ceil(r: &Rat, bits: u32) -> Rat {
    let (num, den) = shift_num(r, bits);
    Rat::new(num.div_ceil(den), BigInt::one() << bits as usize)
}

/// Enclosure of sqrt(r) for r >= 0 with endpoints on the 2^-bits grid of
/// the scaled integer square root.
pub fn sqrt_enclosure(r: &Rat, bits: u32) -> Result<Interval> {
    if r.is_negative() {
        return Err(Error::Internal("sqrt of negative rational".into()));
    }
    let scaled = r.numer() * r.denom() << (2 * bits as usize);
    let s = scaled.sqrt();
    let den = r.denom() << bits as usize;
    Ok(Interval::new(
        Rat::new(s.clone(), den.clone()),
        Rat::new(s + BigInt::one(), den),
    ))
}

/// Rational upper bound for sqrt(r), r >= 0.
pub fn sqrt_upper(r: &Rat, bits: u32) -> Result<Rat> {
    Ok(sqrt_enclosure(r, bits)?.hi)
}

/// A closed interval with exact rational endpoints, `lo <= hi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rat,
    pub hi: Rat,
}

impl Interval {
    pub fn new(lo: Rat, hi: Rat) -> Self {
        debug_assert!(lo <= hi, "interval endpoints out of order");
        Interval { lo, hi }
    }

    pub fn point(v: Rat) -> Self {
        Interval {
            lo: v.clone(),
            hi: v,
        }
    }

    pub fn from_int(v: i64) -> Self {
        Self::point(rat_i64(v))
    }

    pub fn from_bigint(v: &BigInt) -> Self {
        Self::point(Rat::from_integer(v.clone()))
    }

    pub fn zero() -> Self {
        Self::point(Rat::zero())
    }

    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn mid(&self) -> Rat {
        (&self.lo + &self.hi) / rat_i64(2)
    }

    /// Upper bound on |x| over the interval.
    pub fn mag(&self) -> Rat {
        self.lo.abs().max(self.hi.abs())
    }

    /// Lower bound on |x| over the interval (zero if it straddles zero).
    pub fn mig(&self) -> Rat {
        if self.contains_zero() {
            Rat::zero()
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    /// True only for the degenerate enclosure [0, 0].
    pub fn is_exact_zero(&self) -> bool {
        self.lo.is_zero() && self.hi.is_zero()
    }

    pub fn contains(&self, v: &Rat) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }

    /// Certified strict comparison: every value here < every value there.
    pub fn lt(&self, other: &Interval) -> bool {
        self.hi < other.lo
    }

    pub fn gt(&self, other: &Interval) -> bool {
        self.lo > other.hi
    }

    /// Certified <=: every value here <= every value there.
    pub fn le(&self, other: &Interval) -> bool {
        self.hi <= other.lo
    }

    pub fn ge(&self, other: &Interval) -> bool {
        self.lo >= other.hi
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        !(self.lt(other) || self.gt(other))
    }

    /// Round endpoints outward onto the 2^-bits dyadic grid.  This bounds
    /// the bit growth of long computations while preserving containment.
    pub fn round_out(&self, bits: u32) -> Interval {
        Interval {
            lo: dyadic_floor(&self.lo, bits),
            hi: dyadic_ceil(&self.hi, bits),
        }
    }

    pub fn widen(&self, slack: &Rat) -> Interval {
        debug_assert!(!slack.is_negative());
        Interval {
            lo: &self.lo - slack,
            hi: &self.hi + slack,
        }
    }

    pub fn neg(&self) -> Interval {
        Interval {
            lo: -self.hi.clone(),
            hi: -self.lo.clone(),
        }
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

    pub fn mul(&self, other: &Interval) -> Interval {
        let candidates = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let mut lo = candidates[0].clone();
        let mut hi = candidates[0].clone();
        for c in &candidates[1..] {
            if *c < lo {
                lo = c.clone();
            }
            if *c > hi {
                hi = c.clone();
            }
        }
        Interval { lo, hi }
    }

    pub fn scale(&self, f: &Rat) -> Interval {
        if f.is_negative() {
            Interval {
                lo: &self.hi * f,
                hi: &self.lo * f,
            }
        } else {
            Interval {
                lo: &self.lo * f,
                hi: &self.hi * f,
            }
        }
    }

    /// Division; fails when the divisor encloses zero.
    pub fn div(&self, other: &Interval) -> Result<Interval> {
        if other.contains_zero() {
            return Err(Error::Internal(
                "interval division by zero enclosure".into(),
            ));
        }
        let inv = Interval {
            lo: other.hi.recip(),
            hi: other.lo.recip(),
        };
        Ok(self.mul(&inv))
    }

    pub fn abs(&self) -> Interval {
        if self.contains_zero() {
            Interval {
                lo: Rat::zero(),
                hi: self.mag(),
            }
        } else if self.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn square(&self) -> Interval {
        let a = self.abs();
        Interval {
            lo: &a.lo * &a.lo,
            hi: &a.hi * &a.hi,
        }
    }

    pub fn pow_u32(&self, mut e: u32) -> Interval {
        let mut base = self.clone();
        let mut acc = Interval::point(Rat::one());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.square_signed();
            }
        }
        acc
    }

    /// Square preserving sign information (x*x, not |x|^2 tightening):
    /// identical to `mul(self, self)` but cheaper.
    fn square_signed(&self) -> Interval {
        self.mul(self)
    }

    pub fn max(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().max(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    pub fn min(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().min(other.hi.clone()),
        }
    }

    /// Convex hull.
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    /// Approximate f64 value of the midpoint; display/diagnostics only.
    pub fn mid_f64(&self) -> f64 {
        self.mid().to_f64().unwrap_or(f64::NAN)
    }

    /// Floor shared by the entire enclosure, if determined.
    pub fn floor_unique(&self) -> Option<BigInt> {
        let lo = self.lo.floor().to_integer();
        let hi = self.hi.floor().to_integer();
        (lo == hi).then_some(lo)
    }

    /// Nearest integer shared by the entire enclosure, if determined.
    /// Exact half-integers are never "determined" and yield None forever;
    /// callers treat an unresolvable answer as a rounding tie.
    pub fn round_unique(&self) -> Option<BigInt> {
        let half = Rat::new(BigInt::one(), BigInt::from(2));
        Interval::new(&self.lo + &half, &self.hi + &half).floor_unique()
    }
}

/// Natural logarithm enclosure of a positive rational, certified via the
/// atanh series after range reduction into [3/4, 3/2).
pub fn ln_rat(x: &Rat, bits: u32) -> Result<Interval> {
    if !x.is_positive() {
        return Err(Error::Internal("log of non-positive value".into()));
    }
    let w = bits + 24;
    // Range-reduce x = y * 2^e with y in [3/4, 3/2).
    let mut e: i64 = (x.numer().bits() as i64) - (x.denom().bits() as i64);
    let mut y = x * pow2(-e);
    let three_half = Rat::new(BigInt::from(3), BigInt::from(2));
    let three_quarter = Rat::new(BigInt::from(3), BigInt::from(4));
    while y >= three_half {
        y = y / rat_i64(2);
        e += 1;
    }
    while y < three_quarter {
        y = y * rat_i64(2);
        e -= 1;
    }
    let t = (&y - Rat::one()) / (&y + Rat::one());
    let mut acc = atanh_series(&t, w);
    acc = acc.scale(&rat_i64(2));
    if e != 0 {
        let l2 = ln2(w)?;
        acc = acc.add(&l2.scale(&rat_i64(e)));
    }
    Ok(acc.round_out(bits + 4))
}

/// Enclosure of ln over a positive interval.
pub fn ln_interval(x: &Interval, bits: u32) -> Result<Interval> {
    if !x.is_positive() {
        return Err(Error::Internal("log of interval touching zero".into()));
    }
    let lo = ln_rat(&x.lo, bits)?;
    let hi = ln_rat(&x.hi, bits)?;
    Ok(Interval::new(lo.lo, hi.hi))
}

/// atanh(t) = sum t^(2j+1)/(2j+1) for |t| <= 1/3, with a certified tail.
fn atanh_series(t: &Rat, w: u32) -> Interval {
    debug_assert!(t.abs() <= Rat::new(BigInt::from(34), BigInt::from(100)));
    let ti = Interval::point(t.clone()).round_out(w);
    let t2 = ti.square().round_out(w);
    let mut term = ti;
    let mut sum = Interval::zero();
    let cutoff = pow2(-(w as i64));
    let mut j: u64 = 0;
    loop {
        let denom = rat_i64((2 * j + 1) as i64);
        sum = sum.add(&term.scale(&denom.recip())).round_out(w);
        let next = term.mul(&t2).round_out(w);
        let next_mag = next.mag();
        if next_mag <= cutoff {
            // Geometric tail bound: |t|^2 <= 1/8 after reduction, so the
            // remaining sum is below 2 * |next term|.
            let slack = &next_mag * rat_i64(2);
            sum = sum.widen(&slack);
            return sum;
        }
        term = next;
        j += 1;
    }
}

static LN2_CACHE: RwLock<Option<(u32, Interval)>> = RwLock::new(None);

/// Enclosure of ln 2 = 2 atanh(1/3), cached at the widest precision seen.
pub fn ln2(bits: u32) -> Result<Interval> {
    if let Some((b, v)) = LN2_CACHE.read().expect("ln2 cache poisoned").clone() {
        if b >= bits {
            return Ok(v.round_out(bits));
        }
    }
    let third = Rat::new(BigInt::one(), BigInt::from(3));
    let v = atanh_series(&third, bits + 8)
        .scale(&rat_i64(2))
        .round_out(bits + 4);
    let mut guard = LN2_CACHE.write().expect("ln2 cache poisoned");
    match guard.as_ref() {
        Some((b, _)) if *b >= bits => {}
        _ => *guard = Some((bits, v.clone())),
    }
    Ok(v)
}

/// Decimal rendering with directed rounding; `up` rounds away from -inf.
pub fn decimal_string(r: &Rat, digits: usize, up: bool) -> String {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = r * Rat::from_integer(scale);
    let n = if up {
        scaled.ceil().to_integer()
    } else {
        scaled.floor().to_integer()
    };
    let neg = n.is_negative();
    let mut digits_str = n.abs().to_string();
    if digits_str.len() <= digits {
        let pad = digits + 1 - digits_str.len();
        digits_str = format!("{}{}", "0".repeat(pad), digits_str);
    }
    let split = digits_str.len() - digits;
    let (int_part, frac_part) = digits_str.split_at(split);
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

/// Parse a plain decimal string (sign, digits, optional fraction, optional
/// `e<exp>`) into an exact rational.
pub fn parse_decimal(s: &str) -> Option<Rat> {
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (mantissa, neg) = match mantissa.strip_prefix('-') {
        Some(rest) => (rest, true),
        None => (mantissa.strip_prefix('+').unwrap_or(mantissa), false),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let joined = format!("{int_part}{frac_part}");
    let num: BigInt = joined.parse().ok()?;
    let num = if neg { -num } else { num };
    let mut r = Rat::new(num, BigInt::from(10u32).pow(frac_part.len() as u32));
    if exp != 0 {
        let ten = Rat::from_integer(BigInt::from(10));
        if exp > 0 {
            for _ in 0..exp {
                r = r * ten.clone();
            }
        } else {
            for _ in 0..(-exp) {
                r = r / ten.clone();
            }
        }
    }
    Some(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn dyadic_rounding_brackets_value() {
        let r = rat(1, 3);
        let lo = dyadic_floor(&r, 16);
        let hi = dyadic_ceil(&r, 16);
        assert!(lo <= r && r <= hi);
        assert!(&hi - &lo <= pow2(-16));
    }

    #[test]
    fn sqrt_enclosure_contains_root() {
        let e = sqrt_enclosure(&rat(2, 1), 64).unwrap();
        let lo2 = &e.lo * &e.lo;
        let hi2 = &e.hi * &e.hi;
        assert!(lo2 <= rat(2, 1) && rat(2, 1) <= hi2);
        assert!(e.width() <= pow2(-60));
    }

    #[test]
    fn ln_two_matches_reference() {
        // ln 2 = 0.69314718055994530941...
        let v = ln2(128).unwrap();
        let lo = parse_decimal("0.693147180559945309").unwrap();
        let hi = parse_decimal("0.693147180559945310").unwrap();
        assert!(v.lo <= hi && lo <= v.hi, "ln2 enclosure {v:?}");
        assert!(v.width() <= pow2(-100));
    }

    #[test]
    fn ln_respects_products() {
        let a = rat(7, 2);
        let b = rat(13, 5);
        let la = ln_rat(&a, 96).unwrap();
        let lb = ln_rat(&b, 96).unwrap();
        let lab = ln_rat(&(a * b), 96).unwrap();
        assert!(lab.overlaps(&la.add(&lb)));
    }

    #[test]
    fn ln_of_tiny_value_is_tight() {
        let x = Rat::new(BigInt::one(), BigInt::from(10u32).pow(50));
        let v = ln_rat(&x, 128).unwrap();
        assert!(v.is_negative());
        // -50 ln 10 = -115.1292546497...
        let lo = parse_decimal("-115.12925465").unwrap();
        let hi = parse_decimal("-115.12925464").unwrap();
        assert!(v.lo <= hi && lo <= v.hi);
    }

    #[test]
    fn decimal_rendering_directed() {
        let r = rat(1, 3);
        assert_eq!(decimal_string(&r, 6, false), "0.333333");
        assert_eq!(decimal_string(&r, 6, true), "0.333334");
        let neg = rat(-1, 3);
        assert_eq!(decimal_string(&neg, 6, false), "-0.333334");
        assert_eq!(decimal_string(&neg, 6, true), "-0.333333");
    }

    #[test]
    fn parse_decimal_roundtrip() {
        let r = parse_decimal("-12.0625e-1").unwrap();
        assert_eq!(r, rat(-120625, 100000));
        assert!(parse_decimal("1.2.3").is_none());
    }

    #[test]
    fn interval_mul_signs() {
        let a = Interval::new(rat(-2, 1), rat(3, 1));
        let b = Interval::new(rat(-5, 1), rat(1, 1));
        let p = a.mul(&b);
        assert_eq!(p.lo, rat(-15, 1));
        assert_eq!(p.hi, rat(10, 1));
    }
}
