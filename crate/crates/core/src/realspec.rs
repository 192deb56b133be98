//! Exact specifications of real numbers and their certified enclosures.
//!
//! A `RealSpec` is the only way numeric inputs enter the library.  Every
//! kind except the decimal literal can be refined to arbitrary precision;
//! decimal literals carry an explicit trust radius and refuse queries that
//! exceed it instead of fabricating digits.
//!
//! Text grammar (round-tripped by `parse` / `Display`):
//!
//! ```text
//! rat:p/q
//! surd:(a+b*sqrt(c))/d
//! alg:[c0,c1,...,ck]@[lo,hi]
//! dec:0.1234e0@digits
//! cf:fibword(a,b)
//! cf:[a0;a1,a2,...]
//! pow:(<spec>)^k
//! ```

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::fmt;

use crate::error::{Error, Result};
use crate::interval::{pow2, sqrt_enclosure, Interval, Rat};
use crate::poly::IPoly;

#[derive(Clone, Debug, PartialEq)]
pub enum RealSpec {
    /// Exact rational p/q.
    Rational(Rat),
    /// (a + b*sqrt(c)) / d with c > 0 squarefree, d > 0, b != 0.
    QuadraticSurd {
        a: BigInt,
        b: BigInt,
        c: BigInt,
        d: BigInt,
    },
    /// Root of an integer polynomial isolated in [lo, hi].
    AlgebraicRoot { poly: IPoly, lo: Rat, hi: Rat },
    /// Decimal digit string trusted to +- half an ulp of the stated digits.
    DecimalLiteral { value: Rat, digits: u32 },
    /// Number given by its (finite or programmatic) continued fraction.
    ContinuedFraction(CfSpec),
    /// Integer power of another spec.  Rational and quadratic-surd bases
    /// collapse to their exact closed forms at construction.
    Power { base: Box<RealSpec>, exp: u32 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum CfSpec {
    /// [a0; a1, a2, ...] with a_k >= 1 for k >= 1.  Finite, hence rational.
    Explicit(Vec<BigInt>),
    /// [0; w_1, w_2, ...] where w is the infinite binary Fibonacci word over
    /// the alphabet {a, b}: S_0 = a, S_1 = ab, S_{n+1} = S_n S_{n-1}.
    FibWord { a: u64, b: u64 },
}

impl CfSpec {
    /// First `count` partial quotients (including a_0).
    pub fn quotients(&self, count: usize) -> Vec<BigInt> {
        match self {
            CfSpec::Explicit(q) => q.iter().take(count).cloned().collect(),
            CfSpec::FibWord { a, b } => {
                let mut out = Vec::with_capacity(count);
                out.push(BigInt::zero());
                if count > 1 {
                    for w in fib_word(*a, *b, count - 1) {
                        out.push(BigInt::from(w));
                    }
                }
                out
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, CfSpec::Explicit(_))
    }
}

/// First `len` letters of the infinite Fibonacci word over {a, b}.
pub fn fib_word(a: u64, b: u64, len: usize) -> Vec<u64> {
    let mut prev = vec![a];
    let mut cur = vec![a, b];
    if len <= 1 {
        return prev.into_iter().take(len).collect();
    }
    while cur.len() < len {
        let next: Vec<u64> = cur.iter().chain(prev.iter()).cloned().collect();
        prev = cur;
        cur = next;
    }
    cur.truncate(len);
    cur
}

impl RealSpec {
    pub fn rational(n: BigInt, d: BigInt) -> Result<Self> {
        if d.is_zero() {
            return Err(Error::InvalidSpec("rational with zero denominator".into()));
        }
        Ok(RealSpec::Rational(Rat::new(n, d)))
    }

    /// Build (a + b*sqrt(c))/d, normalizing: square factors of c are pulled
    /// into b, signs are fixed so d > 0, and the gcd of (a, b, d) is divided
    /// out.  Degenerate cases (b = 0 or c a perfect square) collapse to the
    /// rational kind.
    pub fn surd(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Result<Self> {
        if d.is_zero() {
            return Err(Error::InvalidSpec("surd with zero denominator".into()));
        }
        if !c.is_positive() {
            return Err(Error::InvalidSpec("surd radicand must be positive".into()));
        }
        let (mut a, mut b, mut d) = (a, b, d);
        let mut c = c;
        // Extract square factors with trial division over small primes.
        let mut p = BigInt::from(2);
        let limit = BigInt::from(100_000u32);
        while &(&p * &p) <= &c && p <= limit {
            let p2 = &p * &p;
            while (&c % &p2).is_zero() {
                c /= &p2;
                b *= &p;
            }
            p += 1;
        }
        if c.is_one() {
            a += &b;
            return RealSpec::rational(a, d);
        }
        if b.is_zero() {
            return RealSpec::rational(a, d);
        }
        if d.is_negative() {
            a = -a;
            b = -b;
            d = -d;
        }
        let g = a.gcd(&b).gcd(&d);
        if g > BigInt::one() {
            a /= &g;
            b /= &g;
            d /= &g;
        }
        Ok(RealSpec::QuadraticSurd { a, b, c, d })
    }

    /// Root of `poly` isolated in [lo, hi].  The polynomial must be
    /// squarefree with exactly one root strictly inside the interval and no
    /// root at either endpoint.
    pub fn algebraic(poly: IPoly, lo: Rat, hi: Rat) -> Result<Self> {
        if poly.degree() < 1 || poly.is_zero() {
            return Err(Error::InvalidSpec(
                "algebraic spec needs degree >= 1".into(),
            ));
        }
        if lo >= hi {
            return Err(Error::InvalidSpec("empty isolating interval".into()));
        }
        if !poly.is_squarefree() {
            return Err(Error::InvalidSpec("polynomial is not squarefree".into()));
        }
        match poly.count_roots_open(&lo, &hi) {
            Some(1) => {}
            Some(n) => {
                return Err(Error::InvalidSpec(format!(
                    "isolating interval contains {n} roots, expected exactly 1"
                )))
            }
            None => {
                return Err(Error::InvalidSpec(
                    "polynomial vanishes at an isolating endpoint".into(),
                ))
            }
        }
        if poly.degree() == 1 {
            let c = poly.coeffs();
            return Ok(RealSpec::Rational(Rat::new(-c[0].clone(), c[1].clone())));
        }
        Ok(RealSpec::AlgebraicRoot { poly, lo, hi })
    }

    pub fn decimal(text: &str, digits: u32) -> Result<Self> {
        let value = crate::interval::parse_decimal(text)
            .ok_or_else(|| Error::InvalidSpec(format!("bad decimal literal: {text}")))?;
        if digits == 0 {
            return Err(Error::InvalidSpec(
                "decimal literal needs digits >= 1".into(),
            ));
        }
        Ok(RealSpec::DecimalLiteral { value, digits })
    }

    pub fn cf_explicit(quots: Vec<BigInt>) -> Result<Self> {
        if quots.is_empty() {
            return Err(Error::InvalidSpec("empty continued fraction".into()));
        }
        if quots.iter().skip(1).any(|q| !q.is_positive()) {
            return Err(Error::InvalidSpec(
                "continued fraction partial quotients must be positive from a1 on".into(),
            ));
        }
        Ok(RealSpec::ContinuedFraction(CfSpec::Explicit(quots)))
    }

    pub fn cf_fibword(a: u64, b: u64) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(Error::InvalidSpec(
                "fibword letters must be positive".into(),
            ));
        }
        Ok(RealSpec::ContinuedFraction(CfSpec::FibWord { a, b }))
    }

    /// base^exp, collapsing whatever admits a closed form: exponent 0 is
    /// the constant 1, rationals power through exactly, quadratic surds
    /// stay quadratic surds, and nested powers merge their exponents.
    pub fn power(base: RealSpec, exp: u32) -> Result<Self> {
        if exp == 0 {
            return Ok(RealSpec::Rational(Rat::one()));
        }
        if exp == 1 {
            return Ok(base);
        }
        if let Some(r) = base.as_rational() {
            return Ok(RealSpec::Rational(rat_power(&r, exp)));
        }
        match base {
            RealSpec::QuadraticSurd { a, b, c, d } => {
                // Binary powering in Z[sqrt(c)].
                let (mut ra, mut rb) = (BigInt::one(), BigInt::zero());
                let (mut pa, mut pb) = (a, b);
                let mut e = exp;
                while e > 0 {
                    if e & 1 == 1 {
                        (ra, rb) = (&ra * &pa + &rb * &pb * &c, &ra * &pb + &rb * &pa);
                    }
                    e >>= 1;
                    if e > 0 {
                        (pa, pb) = (&pa * &pa + &pb * &pb * &c, BigInt::from(2) * &pa * &pb);
                    }
                }
                RealSpec::surd(ra, rb, c, d.pow(exp))
            }
            RealSpec::Power { base, exp: inner } => {
                let merged = inner
                    .checked_mul(exp)
                    .ok_or_else(|| Error::InvalidSpec("power exponent overflow".into()))?;
                Ok(RealSpec::Power { base, exp: merged })
            }
            other => Ok(RealSpec::Power {
                base: Box::new(other),
                exp,
            }),
        }
    }

    /// Exact rational value when the spec denotes one.
    pub fn as_rational(&self) -> Option<Rat> {
        match self {
            RealSpec::Rational(r) => Some(r.clone()),
            RealSpec::ContinuedFraction(CfSpec::Explicit(q)) => {
                let (p, qd) = convergents(q).pop().expect("nonempty cf");
                Some(Rat::new(p, qd))
            }
            RealSpec::Power { base, exp } => base.as_rational().map(|r| rat_power(&r, *exp)),
            _ => None,
        }
    }

    /// True when the enclosure can be tightened without bound.
    pub fn is_refinable(&self) -> bool {
        match self {
            RealSpec::DecimalLiteral { .. } => false,
            RealSpec::Power { base, .. } => base.is_refinable(),
            _ => true,
        }
    }

    /// Upper bound on the algebraic degree, when the spec certifies one.
    pub fn algebraic_degree_bound(&self) -> Option<usize> {
        match self {
            RealSpec::Rational(_) => Some(1),
            RealSpec::QuadraticSurd { .. } => Some(2),
            RealSpec::AlgebraicRoot { poly, .. } => Some(poly.degree()),
            RealSpec::ContinuedFraction(CfSpec::Explicit(_)) => Some(1),
            // base^k lives in the field generated by the base.
            RealSpec::Power { base, .. } => base.algebraic_degree_bound(),
            _ => None,
        }
    }

    /// Certified enclosure of width at most 2^(1-prec) * max(1, |value|).
    /// Refinement is monotone: higher precision yields a nested interval.
    pub fn eval(&self, prec: u32) -> Result<Interval> {
        let prec = prec.max(8);
        match self {
            RealSpec::Rational(r) => Ok(Interval::point(r.clone())),
            RealSpec::QuadraticSurd { a, b, c, d } => {
                let w = prec + b.bits() as u32 + 4;
                let s = sqrt_enclosure(&Rat::from_integer(c.clone()), w)?;
                let af = Rat::from_integer(a.clone());
                let bf = Rat::from_integer(b.clone());
                let df = Rat::from_integer(d.clone());
                Ok(s.scale(&bf).add(&Interval::point(af)).scale(&df.recip()))
            }
            RealSpec::AlgebraicRoot { poly, lo, hi } => {
                let mut lo = lo.clone();
                let mut hi = hi.clone();
                let scale = Rat::one().max(lo.abs().max(hi.abs()));
                let target = pow2(1 - prec as i64) * scale;
                let sign_hi = poly.eval_rat(&hi).is_positive();
                while &hi - &lo > target {
                    let mid = (&lo + &hi) / Rat::from_integer(BigInt::from(2));
                    let v = poly.eval_rat(&mid);
                    if v.is_zero() {
                        return Ok(Interval::point(mid));
                    }
                    if v.is_positive() == sign_hi {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                Ok(Interval::new(lo, hi))
            }
            RealSpec::DecimalLiteral { value, digits } => {
                let radius = Rat::new(
                    BigInt::one(),
                    BigInt::from(2) * BigInt::from(10u32).pow(*digits),
                );
                let scale = Rat::one().max(value.abs());
                let required = pow2(1 - prec as i64) * scale;
                if required < radius.clone() * Rat::from_integer(BigInt::from(2)) {
                    return Err(Error::PrecisionExhausted {
                        context: format!(
                            "decimal literal trusted to {digits} digits queried at {prec} bits"
                        ),
                        cap_bits: prec,
                    });
                }
                Ok(Interval::new(value - &radius, value + &radius))
            }
            RealSpec::ContinuedFraction(cf) => {
                if let CfSpec::Explicit(q) = cf {
                    let (p, qd) = convergents(q).pop().expect("nonempty cf");
                    return Ok(Interval::point(Rat::new(p, qd)));
                }
                let mut count = 8usize;
                loop {
                    let quots = cf.quotients(count);
                    let conv = convergents(&quots);
                    let n = conv.len();
                    let (pa, qa) = &conv[n - 2];
                    let (pb, qb) = &conv[n - 1];
                    let va = Rat::new(pa.clone(), qa.clone());
                    let vb = Rat::new(pb.clone(), qb.clone());
                    let width = (&va - &vb).abs();
                    let scale = Rat::one().max(vb.abs());
                    if width <= pow2(1 - prec as i64) * scale {
                        return Ok(Interval::new(va.clone().min(vb.clone()), va.max(vb)));
                    }
                    count *= 2;
                }
            }
            RealSpec::Power { base, exp } => {
                // The relative width of x^n is about n times that of x, so
                // one shot with log2(n) extra bits almost always lands.
                let mut w = prec + (33 - (exp | 1).leading_zeros()) + 6;
                loop {
                    let out = base.eval(w)?.pow_u32(*exp);
                    let scale = Rat::one().max(out.mag());
                    if out.width() <= pow2(1 - prec as i64) * scale {
                        return Ok(out);
                    }
                    if w >= prec.saturating_mul(64).saturating_add(4096) {
                        return Err(Error::PrecisionExhausted {
                            context: format!("power spec queried at {prec} bits"),
                            cap_bits: w,
                        });
                    }
                    w *= 2;
                }
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let (kind, body) = text
            .split_once(':')
            .ok_or_else(|| Error::InvalidSpec(format!("missing kind prefix: {text}")))?;
        match kind {
            "rat" => parse_rat(body),
            "surd" => parse_surd(body),
            "alg" => parse_alg(body),
            "dec" => parse_dec(body),
            "cf" => parse_cf(body),
            "pow" => parse_pow(body),
            other => Err(Error::InvalidSpec(format!("unknown spec kind: {other}"))),
        }
    }
}

impl fmt::Display for RealSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealSpec::Rational(r) => {
                if r.denom().is_one() {
                    write!(f, "rat:{}", r.numer())
                } else {
                    write!(f, "rat:{}/{}", r.numer(), r.denom())
                }
            }
            RealSpec::QuadraticSurd { a, b, c, d } => {
                if b.is_negative() {
                    write!(f, "surd:({}-{}*sqrt({}))/{}", a, -b, c, d)
                } else {
                    write!(f, "surd:({}+{}*sqrt({}))/{}", a, b, c, d)
                }
            }
            RealSpec::AlgebraicRoot { poly, lo, hi } => {
                let coeffs: Vec<String> = poly.coeffs().iter().map(|c| c.to_string()).collect();
                write!(
                    f,
                    "alg:[{}]@[{},{}]",
                    coeffs.join(","),
                    rat_text(lo),
                    rat_text(hi)
                )
            }
            RealSpec::DecimalLiteral { value, digits } => {
                write!(f, "dec:{}@{}", exact_decimal_text(value), digits)
            }
            RealSpec::ContinuedFraction(CfSpec::FibWord { a, b }) => {
                write!(f, "cf:fibword({a},{b})")
            }
            RealSpec::ContinuedFraction(CfSpec::Explicit(q)) => {
                let rest: Vec<String> = q[1..].iter().map(|v| v.to_string()).collect();
                write!(f, "cf:[{};{}]", q[0], rest.join(","))
            }
            RealSpec::Power { base, exp } => write!(f, "pow:({base})^{exp}"),
        }
    }
}

fn rat_power(r: &Rat, mut e: u32) -> Rat {
    let mut base = r.clone();
    let mut acc = Rat::one();
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    acc
}

fn rat_text(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exact decimal text for a rational whose denominator divides a power of
/// ten (guaranteed for parsed decimal literals).
fn exact_decimal_text(value: &Rat) -> String {
    let mut digits = 0u32;
    let ten = BigInt::from(10);
    let mut den = value.denom().clone();
    while !den.is_one() && digits < 20_000 {
        den *= &ten; // walk up: denominator of value * 10^digits
        let scaled = value * Rat::from_integer(BigInt::from(10u32).pow(digits + 1));
        if scaled.denom().is_one() {
            return crate::interval::decimal_string(value, digits as usize + 1, false);
        }
        digits += 1;
    }
    crate::interval::decimal_string(value, 0, false)
}

/// Convergents (p_k, q_k) of a quotient list, k = 0..len-1.
pub fn convergents(quots: &[BigInt]) -> Vec<(BigInt, BigInt)> {
    let mut out = Vec::with_capacity(quots.len());
    let (mut p2, mut p1) = (BigInt::zero(), BigInt::one()); // p_{-2}, p_{-1}
    let (mut q2, mut q1) = (BigInt::one(), BigInt::zero());
    for a in quots {
        let p = a * &p1 + &p2;
        let q = a * &q1 + &q2;
        out.push((p.clone(), q.clone()));
        p2 = p1;
        p1 = p;
        q2 = q1;
        q1 = q;
    }
    out
}

fn parse_bigint(s: &str) -> Result<BigInt> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidSpec(format!("bad integer: {s}")))
}

fn parse_number(s: &str) -> Result<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        return Ok(Rat::new(parse_bigint(n)?, parse_bigint(d)?));
    }
    if s.contains('.') || s.contains(['e', 'E']) {
        return crate::interval::parse_decimal(s)
            .ok_or_else(|| Error::InvalidSpec(format!("bad number: {s}")));
    }
    Ok(Rat::from_integer(parse_bigint(s)?))
}

fn parse_rat(body: &str) -> Result<RealSpec> {
    match body.split_once('/') {
        Some((n, d)) => RealSpec::rational(parse_bigint(n)?, parse_bigint(d)?),
        None => RealSpec::rational(parse_bigint(body)?, BigInt::one()),
    }
}

fn parse_surd(body: &str) -> Result<RealSpec> {
    let err = || Error::InvalidSpec(format!("bad surd (expected (a+b*sqrt(c))/d): {body}"));
    let body = body.trim();
    let inner_end = body.rfind(')').ok_or_else(err)?;
    if !body.starts_with('(') {
        return Err(err());
    }
    // Split "(...)/d": the closing paren of the outer group precedes '/'.
    let slash = body[..].rfind('/').ok_or_else(err)?;
    if slash < inner_end {
        return Err(err());
    }
    let d = parse_bigint(&body[slash + 1..])?;
    let inner = &body[1..slash - 1];
    // inner = a + b*sqrt(c)  |  a - b*sqrt(c)
    let sqrt_pos = inner.find("sqrt(").ok_or_else(err)?;
    let c_text = inner[sqrt_pos + 5..]
        .strip_suffix(')')
        .map(str::to_owned)
        .unwrap_or_else(|| inner[sqrt_pos + 5..].trim_end_matches(')').to_owned());
    let c = parse_bigint(&c_text)?;
    let prefix = &inner[..sqrt_pos];
    let prefix = prefix.strip_suffix('*').unwrap_or(prefix);
    // Find the sign splitting a from b: last '+' or '-' not at position 0.
    let bytes = prefix.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        if bytes[i] == b'+' || bytes[i] == b'-' {
            split = Some(i);
            break;
        }
    }
    let (a, b) = match split {
        Some(i) => {
            let a = parse_bigint(&prefix[..i])?;
            let sign = if bytes[i] == b'-' {
                -BigInt::one()
            } else {
                BigInt::one()
            };
            let b_text = prefix[i + 1..].trim();
            let b = if b_text.is_empty() {
                BigInt::one()
            } else {
                parse_bigint(b_text)?
            };
            (a, sign * b)
        }
        None => {
            // No explicit a: "(b*sqrt(c))/d" form.
            let b_text = prefix.trim();
            let b = if b_text.is_empty() {
                BigInt::one()
            } else {
                parse_bigint(b_text)?
            };
            (BigInt::zero(), b)
        }
    };
    RealSpec::surd(a, b, c, d)
}

fn parse_bracket_list(body: &str) -> Result<Vec<&str>> {
    let inner = body
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| Error::InvalidSpec(format!("expected [..]: {body}")))?;
    Ok(inner.split(',').collect())
}

fn parse_alg(body: &str) -> Result<RealSpec> {
    let (coeffs_text, interval_text) = body
        .split_once('@')
        .ok_or_else(|| Error::InvalidSpec(format!("algebraic spec needs @[lo,hi]: {body}")))?;
    let coeffs = parse_bracket_list(coeffs_text)?
        .into_iter()
        .map(parse_bigint)
        .collect::<Result<Vec<_>>>()?;
    let ends = parse_bracket_list(interval_text)?;
    if ends.len() != 2 {
        return Err(Error::InvalidSpec(format!(
            "bad isolating interval: {interval_text}"
        )));
    }
    let lo = parse_number(ends[0])?;
    let hi = parse_number(ends[1])?;
    RealSpec::algebraic(IPoly::new(coeffs), lo, hi)
}

fn parse_dec(body: &str) -> Result<RealSpec> {
    let (mantissa, digits) = body
        .split_once('@')
        .ok_or_else(|| Error::InvalidSpec(format!("decimal literal needs @digits: {body}")))?;
    let digits: u32 = digits
        .parse()
        .map_err(|_| Error::InvalidSpec(format!("bad digit count: {digits}")))?;
    RealSpec::decimal(mantissa, digits)
}

fn parse_pow(body: &str) -> Result<RealSpec> {
    let err = || Error::InvalidSpec(format!("bad power (expected (spec)^k): {body}"));
    let rest = body.trim().strip_prefix('(').ok_or_else(err)?;
    let caret = rest.rfind(")^").ok_or_else(err)?;
    let base = RealSpec::parse(&rest[..caret])?;
    let exp: u32 = rest[caret + 2..].trim().parse().map_err(|_| err())?;
    RealSpec::power(base, exp)
}

fn parse_cf(body: &str) -> Result<RealSpec> {
    let body = body.trim();
    if let Some(args) = body
        .strip_prefix("fibword(")
        .and_then(|s| s.strip_suffix(')'))
    {
        let parts: Vec<&str> = args.split(',').collect();
        if parts.len() != 2 {
            return Err(Error::InvalidSpec(format!(
                "fibword needs two letters: {body}"
            )));
        }
        let a = parts[0]
            .trim()
            .parse()
            .map_err(|_| Error::InvalidSpec(format!("bad letter: {}", parts[0])))?;
        let b = parts[1]
            .trim()
            .parse()
            .map_err(|_| Error::InvalidSpec(format!("bad letter: {}", parts[1])))?;
        return RealSpec::cf_fibword(a, b);
    }
    let inner = body
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| Error::InvalidSpec(format!("bad continued fraction: {body}")))?;
    let (a0, rest) = inner
        .split_once(';')
        .ok_or_else(|| Error::InvalidSpec(format!("continued fraction needs a0;...: {body}")))?;
    let mut quots = vec![parse_bigint(a0)?];
    for part in rest.split(',') {
        if part.trim().is_empty() {
            continue;
        }
        quots.push(parse_bigint(part)?);
    }
    RealSpec::cf_explicit(quots)
}
