//! Dense univariate integer polynomials: exact evaluation, gcd, and Sturm
//! root counting.  Degrees stay small (tens at most), so the primitive
//! pseudo-remainder sequence is plenty.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::interval::{Interval, Rat};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IPoly {
    /// coeffs[i] is the coefficient of x^i; no trailing zeros.
    coeffs: Vec<BigInt>,
}

impl IPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IPoly { coeffs: vec![] }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn leading(&self) -> &BigInt {
        self.coeffs
            .last()
            .expect("leading coefficient of zero polynomial")
    }

    pub fn eval_rat(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + Rat::from_integer(c.clone());
        }
        acc
    }

    pub fn eval_interval(&self, x: &Interval) -> Interval {
        let mut acc = Interval::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(&Interval::from_bigint(c));
        }
        acc
    }

    pub fn derivative(&self) -> IPoly {
        if self.coeffs.len() <= 1 {
            return IPoly::zero();
        }
        IPoly::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, c)| c * BigInt::from(i + 1))
                .collect(),
        )
    }

    pub fn neg(&self) -> IPoly {
        IPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in &self.coeffs {
            g = g.gcd(c);
        }
        g
    }

    pub fn primitive(&self) -> IPoly {
        let g = self.content();
        if g.is_zero() || g.is_one() {
            return self.clone();
        }
        IPoly::new(self.coeffs.iter().map(|c| c / &g).collect())
    }

    pub fn scale(&self, f: &BigInt) -> IPoly {
        IPoly::new(self.coeffs.iter().map(|c| c * f).collect())
    }

    /// Multiply by x^k (coefficient shift); used to build shifted families.
    pub fn shift_up(&self, k: usize) -> IPoly {
        if self.is_zero() {
            return IPoly::zero();
        }
        let mut coeffs = vec![BigInt::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        IPoly::new(coeffs)
    }

    pub fn sub(&self, other: &IPoly) -> IPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![BigInt::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] -= c;
        }
        IPoly::new(out)
    }

    /// Pseudo-remainder of self by other (other nonzero).
    fn pseudo_rem(&self, other: &IPoly) -> IPoly {
        let mut r = self.clone();
        let d = other.degree();
        let lc = other.leading().clone();
        while !r.is_zero() && r.degree() >= d {
            let k = r.degree() - d;
            let coef = r.leading().clone();
            r = r.scale(&lc).sub(&other.scale(&coef).shift_up(k));
        }
        r
    }

    /// Integer polynomial gcd via the primitive pseudo-remainder sequence;
    /// the result is primitive with positive leading coefficient.
    pub fn gcd(&self, other: &IPoly) -> IPoly {
        if self.is_zero() {
            return normalize_sign(other.primitive());
        }
        if other.is_zero() {
            return normalize_sign(self.primitive());
        }
        let mut a = self.primitive();
        let mut b = other.primitive();
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        loop {
            let r = a.pseudo_rem(&b);
            if r.is_zero() {
                return normalize_sign(b.primitive());
            }
            a = b;
            b = r.primitive();
        }
    }

    /// Number of distinct real roots in the open interval (lo, hi), via a
    /// Sturm chain.  Requires nonzero values at both endpoints.
    pub fn count_roots_open(&self, lo: &Rat, hi: &Rat) -> Option<usize> {
        if self.is_zero() || self.eval_rat(lo).is_zero() || self.eval_rat(hi).is_zero() {
            return None;
        }
        let chain = self.sturm_chain();
        let vl = sign_variations(&chain, lo);
        let vh = sign_variations(&chain, hi);
        Some(vl.saturating_sub(vh))
    }

    fn sturm_chain(&self) -> Vec<Vec<Rat>> {
        let to_rat = |p: &IPoly| -> Vec<Rat> {
            p.coeffs
                .iter()
                .map(|c| Rat::from_integer(c.clone()))
                .collect()
        };
        let mut chain = vec![to_rat(self), to_rat(&self.derivative())];
        loop {
            let n = chain.len();
            if chain[n - 1].is_empty() {
                chain.pop();
                return chain;
            }
            let r = rat_rem(&chain[n - 2], &chain[n - 1]);
            if r.is_empty() {
                return chain;
            }
            chain.push(r.iter().map(|c| -c).collect());
        }
    }

    /// True when gcd(P, P') is constant.
    pub fn is_squarefree(&self) -> bool {
        !self.is_zero() && self.gcd(&self.derivative()).degree() == 0
    }
}

fn normalize_sign(p: IPoly) -> IPoly {
    if !p.is_zero() && p.leading().is_negative() {
        p.neg()
    } else {
        p
    }
}

/// Exact remainder of rational polynomials (dense, low-to-high coeffs).
fn rat_rem(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut r: Vec<Rat> = a.to_vec();
    let db = b.len() - 1;
    let lb = b.last().expect("nonzero divisor").clone();
    while r.len() > db {
        let lr = r.last().expect("nonempty").clone();
        if lr.is_zero() {
            r.pop();
            continue;
        }
        let k = r.len() - 1 - db;
        let f = lr / lb.clone();
        for i in 0..=db {
            let t = &b[i] * &f;
            r[k + i] = &r[k + i] - t;
        }
        while r.last().is_some_and(|c| c.is_zero()) {
            r.pop();
        }
    }
    r
}

fn eval_rat_slice(p: &[Rat], x: &Rat) -> Rat {
    let mut acc = Rat::zero();
    for c in p.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

fn sign_variations(chain: &[Vec<Rat>], x: &Rat) -> usize {
    let mut last: Option<bool> = None;
    let mut count = 0;
    for p in chain {
        let v = eval_rat_slice(p, x);
        if v.is_zero() {
            continue;
        }
        let pos = v.is_positive();
        if let Some(prev) = last {
            if prev != pos {
                count += 1;
            }
        }
        last = Some(pos);
    }
    count
}

/// Exact gcd over Q reported through the primitive integer gcd; two integer
/// polynomials are coprime over Q iff this has degree zero.
pub fn coprime_over_q(p: &IPoly, q: &IPoly) -> bool {
    if p.is_zero() || q.is_zero() {
        return false;
    }
    p.gcd(q).degree() == 0
}

pub fn rat_from_bigint(v: BigInt) -> BigRational {
    BigRational::from_integer(v)
}
