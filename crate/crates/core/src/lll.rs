//! Lattice reduction and certified ball enumeration.
//!
//! `lll_reduce` is a plain exact-rational LLL (delta = 3/4) over integer row
//! vectors that also returns the unimodular transform, so callers can carry
//! reduced coordinates back to whatever the rows represent.
//!
//! `enumerate_ball` walks integer coefficient vectors under an *interval*
//! Gram matrix.  All bounds are rounded outward, so the returned set is a
//! certified superset of every vector whose true quadratic form value is
//! within the radius.  Callers re-check candidates exactly.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::interval::{sqrt_upper, Interval, Rat};
use crate::intmat::{canonical_sign, is_zero_vec, sub_scaled};

/// Reduced basis rows plus the unimodular transform that produced them:
/// `basis[i] = sum_j transform[i][j] * original[j]`.
#[derive(Clone, Debug)]
pub struct LllResult {
    pub basis: Vec<Vec<BigInt>>,
    pub transform: Vec<Vec<BigInt>>,
}

const LLL_DELTA_NUM: i64 = 3;
const LLL_DELTA_DEN: i64 = 4;

fn rat_of(v: &BigInt) -> Rat {
    Rat::from_integer(v.clone())
}

/// Gram-Schmidt data: mu coefficients (strictly lower triangular) and the
/// squared lengths of the orthogonalized vectors.  None if rows are
/// linearly dependent.
fn gso(basis: &[Vec<BigInt>]) -> Option<(Vec<Vec<Rat>>, Vec<Rat>)> {
    let n = basis.len();
    let mut mu = vec![vec![Rat::zero(); n]; n];
    let mut b = vec![Rat::zero(); n];
    // Inner products of basis rows with the orthogonal vectors, computed via
    // the standard recurrence over exact rationals.
    let mut star: Vec<Vec<Rat>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut v: Vec<Rat> = basis[i].iter().map(rat_of).collect();
        for j in 0..i {
            let num: Rat = v
                .iter()
                .zip(&star[j])
                .map(|(x, y)| x * y)
                .fold(Rat::zero(), |a, t| a + t);
            let m = num / &b[j];
            for (vk, sk) in v.iter_mut().zip(&star[j]) {
                *vk = &*vk - &m * sk;
            }
            mu[i][j] = m;
        }
        let norm2 = v.iter().map(|x| x * x).fold(Rat::zero(), |a, t| a + t);
        if norm2.is_zero() {
            return None;
        }
        b[i] = norm2;
        star.push(v);
    }
    Some((mu, b))
}

/// Nearest integer to a rational (halves round up).
pub(crate) fn round_rat(r: &Rat) -> BigInt {
    let two_den: BigInt = r.denom() << 1;
    let shifted: BigInt = (r.numer() << 1) + r.denom();
    num_integer::Integer::div_floor(&shifted, &two_den)
}

/// LLL-reduce independent integer rows with delta = 3/4.
pub fn lll_reduce(rows: Vec<Vec<BigInt>>) -> Result<LllResult> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::ShapeMismatch("empty basis".into()));
    }
    let mut basis = rows;
    let mut transform: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigInt::one()
                    } else {
                        BigInt::zero()
                    }
                })
                .collect()
        })
        .collect();
    let (mut mu, mut b) = gso(&basis).ok_or(Error::DependentInput)?;
    let delta = Rat::new(BigInt::from(LLL_DELTA_NUM), BigInt::from(LLL_DELTA_DEN));
    let mut k = 1usize;
    while k < n {
        for j in (0..k).rev() {
            let q = round_rat(&mu[k][j]);
            if !q.is_zero() {
                basis[k] = sub_scaled(&basis[k], &basis[j], &q);
                transform[k] = sub_scaled(&transform[k], &transform[j], &q);
                let qr = rat_of(&q);
                for jj in 0..j {
                    let v = &mu[k][jj] - &qr * &mu[j][jj];
                    mu[k][jj] = v;
                }
                let v = &mu[k][j] - &qr;
                mu[k][j] = v;
            }
        }
        let lhs = &b[k];
        let rhs = (&delta - &mu[k][k - 1] * &mu[k][k - 1]) * &b[k - 1];
        if *lhs >= rhs {
            k += 1;
        } else {
            basis.swap(k, k - 1);
            transform.swap(k, k - 1);
            let (m2, b2) = gso(&basis).ok_or(Error::DependentInput)?;
            mu = m2;
            b = b2;
            k = k.max(2) - 1;
        }
    }
    Ok(LllResult { basis, transform })
}

/// Symmetric interval Gram matrix of interval row vectors, rounded outward
/// onto the 2^-bits grid.
pub fn gram_intervals(rows: &[Vec<Interval>], bits: u32) -> Vec<Vec<Interval>> {
    let n = rows.len();
    let mut g = vec![vec![Interval::zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = Interval::zero();
            for (a, b) in rows[i].iter().zip(&rows[j]) {
                s = s.add(&a.mul(b));
            }
            let s = s.round_out(bits);
            g[i][j] = s.clone();
            g[j][i] = s;
        }
    }
    g
}

/// Cholesky-style decomposition of an interval Gram matrix:
/// q(x) = sum_i d_i (x_i + sum_{j>i} m_{ji} x_j)^2.
/// Fails with `NeedsPrecision` when positivity of a pivot cannot be
/// certified from the enclosures.
fn interval_gso(gram: &[Vec<Interval>], bits: u32) -> Result<(Vec<Vec<Interval>>, Vec<Interval>)> {
    let n = gram.len();
    let mut m = vec![vec![Interval::zero(); n]; n];
    let mut d = vec![Interval::zero(); n];
    for i in 0..n {
        let mut di = gram[i][i].clone();
        for k in 0..i {
            let t = m[i][k].square().mul(&d[k]);
            di = di.sub(&t).round_out(bits);
        }
        if !di.is_positive() {
            return Err(Error::NeedsPrecision(format!(
                "Gram pivot {i} not certifiably positive"
            )));
        }
        d[i] = di;
        for j in i + 1..n {
            let mut num = gram[j][i].clone();
            for k in 0..i {
                let t = m[j][k].mul(&m[i][k]).mul(&d[k]);
                num = num.sub(&t).round_out(bits);
            }
            m[j][i] = num.div(&d[i])?.round_out(bits);
        }
    }
    Ok((m, d))
}

/// All nonzero integer coefficient vectors x (up to sign, first nonzero
/// coordinate positive) whose quadratic form value q(x) = x^T G x possibly
/// lies within `r2`, judged by outward interval bounds.  A certified
/// superset: every x with true q(x) <= r2 appears; some returned x may
/// exceed the radius and must be re-checked exactly by the caller.
pub fn enumerate_ball(
    gram: &[Vec<Interval>],
    r2: &Rat,
    bits: u32,
    node_limit: u64,
) -> Result<Vec<Vec<BigInt>>> {
    let n = gram.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let (m, d) = interval_gso(gram, bits)?;
    let mut out = Vec::new();
    let mut x = vec![BigInt::zero(); n];
    let mut nodes = 0u64;
    let radius = Interval::point(r2.clone());
    descend(
        n,
        &m,
        &d,
        &radius,
        bits,
        &mut x,
        &Interval::zero(),
        &mut out,
        &mut nodes,
        node_limit,
    )?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn descend(
    level: usize,
    m: &[Vec<Interval>],
    d: &[Interval],
    r2: &Interval,
    bits: u32,
    x: &mut Vec<BigInt>,
    partial: &Interval,
    out: &mut Vec<Vec<BigInt>>,
    nodes: &mut u64,
    node_limit: u64,
) -> Result<()> {
    if level == 0 {
        if !is_zero_vec(x) {
            let canon = canonical_sign(x);
            if canon == *x {
                out.push(canon);
            }
        }
        return Ok(());
    }
    let i = level - 1;
    // Offset s_i = sum_{j>i} m[j][i] x_j.
    let mut s = Interval::zero();
    for j in i + 1..m.len() {
        if x[j].is_zero() {
            continue;
        }
        s = s.add(&m[j][i].scale(&Rat::from_integer(x[j].clone())));
    }
    let s = s.round_out(bits);
    // Need d_i (x_i + s)^2 <= r2 - partial for some representative values:
    // allowance uses the largest remaining budget and the smallest pivot.
    let budget = &r2.hi - &partial.lo;
    if budget.is_negative() {
        return Ok(());
    }
    let allowance = &budget / &d[i].lo;
    let rad = sqrt_upper(&allowance, bits.max(32))?;
    let lo = (-&s.hi - &rad).ceil().to_integer();
    let hi = (-&s.lo + &rad).floor().to_integer();
    let mut t = lo;
    while t <= hi {
        *nodes += 1;
        if *nodes > node_limit {
            return Err(Error::Internal(format!(
                "ball enumeration exceeded {node_limit} nodes"
            )));
        }
        x[i] = t.clone();
        let shifted = s.add(&Interval::from_bigint(&t));
        let contrib = shifted.square().mul(&d[i]).round_out(bits);
        let next_partial = partial.add(&contrib).round_out(bits);
        // Prune only when even the optimistic endpoint exceeds the radius.
        if next_partial.lo <= r2.hi {
            descend(
                level - 1,
                m,
                d,
                r2,
                bits,
                x,
                &next_partial,
                out,
                nodes,
                node_limit,
            )?;
        }
        t += 1;
    }
    x[i] = BigInt::zero();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intmat::IntMat;
    use num_traits::One;

    fn bv(vals: &[i64]) -> Vec<BigInt> {
        vals.iter().map(|&v| BigInt::from(v)).collect()
    }

    fn dot_rat(a: &[BigInt], b: &[BigInt]) -> Rat {
        let mut s = BigInt::zero();
        for (x, y) in a.iter().zip(b) {
            s += x * y;
        }
        Rat::from_integer(s)
    }

    #[test]
    fn lll_preserves_lattice_and_transform() {
        let rows = vec![bv(&[201, 37]), bv(&[1648, 297])];
        let red = lll_reduce(rows.clone()).unwrap();
        let orig = IntMat::from_rows(rows).unwrap();
        let t = IntMat::from_rows(red.transform.clone()).unwrap();
        let b = IntMat::from_rows(red.basis.clone()).unwrap();
        assert_eq!(t.mul(&orig).unwrap(), b);
        assert_eq!(t.det().unwrap().abs(), BigInt::one());
        // Same lattice: identical Hermite forms.
        let (h1, _) = orig.hnf_with_transform();
        let (h2, _) = b.hnf_with_transform();
        assert_eq!(h1, h2);
        // Gauss reduction of this lattice gives (1,32) and (40,1);
        // the shortest vector has squared length 1025.
        let n0 = dot_rat(&red.basis[0], &red.basis[0]);
        assert_eq!(
            n0,
            Rat::from_integer(BigInt::from(1025)),
            "basis[0] not shortest"
        );
    }

    #[test]
    fn lll_detects_dependence() {
        let rows = vec![bv(&[1, 2]), bv(&[2, 4])];
        assert!(matches!(lll_reduce(rows), Err(Error::DependentInput)));
    }

    #[test]
    fn lll_satisfies_lovasz_and_size_reduction() {
        let rows = vec![bv(&[7, 0, 1]), bv(&[3, 11, 5]), bv(&[2, 4, 19])];
        let red = lll_reduce(rows).unwrap();
        let (mu, b) = gso(&red.basis).unwrap();
        let half = Rat::new(BigInt::one(), BigInt::from(2));
        let delta = Rat::new(BigInt::from(3), BigInt::from(4));
        for i in 0..red.basis.len() {
            for j in 0..i {
                assert!(mu[i][j].abs() <= half, "not size reduced at ({i},{j})");
            }
        }
        for k in 1..red.basis.len() {
            let rhs = (&delta - &mu[k][k - 1] * &mu[k][k - 1]) * &b[k - 1];
            assert!(b[k] >= rhs, "Lovasz fails at {k}");
        }
    }

    #[test]
    fn ball_enumeration_finds_exact_integer_points() {
        // Identity Gram in 2d, radius 2: vectors with x^2+y^2 <= 2, up to
        // sign: (1,0), (0,1), (1,1), (1,-1).
        let g = vec![
            vec![Interval::from_int(1), Interval::zero()],
            vec![Interval::zero(), Interval::from_int(1)],
        ];
        let got = enumerate_ball(&g, &Rat::from_integer(BigInt::from(2)), 64, 10_000).unwrap();
        let mut norm_sets: Vec<Vec<i64>> = got
            .iter()
            .map(|v| {
                v.iter()
                    .map(|x| i64::try_from(x).unwrap())
                    .collect::<Vec<_>>()
            })
            .collect();
        norm_sets.sort();
        assert_eq!(
            norm_sets,
            vec![vec![0, 1], vec![1, -1], vec![1, 0], vec![1, 1]]
        );
    }

    #[test]
    fn ball_enumeration_superset_under_uncertainty() {
        // Gram with sloppy enclosures still catches the true short vector.
        let fuzz = |v: i64| {
            Interval::new(
                Rat::new(BigInt::from(v * 100 - 1), BigInt::from(100)),
                Rat::new(BigInt::from(v * 100 + 1), BigInt::from(100)),
            )
        };
        let g = vec![vec![fuzz(5), fuzz(3)], vec![fuzz(3), fuzz(2)]];
        // q(x,y) = 5x^2 + 6xy + 2y^2; q(1,-1) = 1.
        let got = enumerate_ball(&g, &Rat::one(), 64, 10_000).unwrap();
        assert!(got.iter().any(|v| v == &bv(&[1, -1])));
    }

    #[test]
    fn ball_enumeration_flags_indefinite_gram() {
        let g = vec![
            vec![Interval::from_int(1), Interval::from_int(3)],
            vec![Interval::from_int(3), Interval::from_int(1)],
        ];
        assert!(matches!(
            enumerate_ball(&g, &Rat::one(), 64, 10_000),
            Err(Error::NeedsPrecision(_))
        ));
    }

    #[test]
    fn node_limit_enforced() {
        let g = vec![
            vec![Interval::from_int(1), Interval::zero()],
            vec![Interval::zero(), Interval::from_int(1)],
        ];
        let r2 = Rat::from_integer(BigInt::from(1_000_000));
        assert!(matches!(
            enumerate_ball(&g, &r2, 64, 50),
            Err(Error::Internal(_))
        ));
    }
}
