//! Exact integer vectors and matrices.
//!
//! Small dense matrices with arbitrary-precision entries.  Provides the
//! pieces the rest of the crate certifies things with: fraction-free
//! determinants, Hermite normal form with a unimodular transform, saturated
//! integer kernels, and minor enumeration.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub fn inf_norm(v: &[BigInt]) -> BigInt {
    v.iter().map(|x| x.abs()).max().unwrap_or_else(BigInt::zero)
}

pub fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn is_zero_vec(v: &[BigInt]) -> bool {
    v.iter().all(|x| x.is_zero())
}

/// gcd of all entries (zero for the zero vector).
pub fn content(v: &[BigInt]) -> BigInt {
    v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x))
}

/// Flip signs so the first nonzero coordinate is positive.
pub fn canonical_sign(v: &[BigInt]) -> Vec<BigInt> {
    match v.iter().find(|x| !x.is_zero()) {
        Some(first) if first.is_negative() => v.iter().map(|x| -x).collect(),
        _ => v.to_vec(),
    }
}

pub fn sub_scaled(a: &[BigInt], b: &[BigInt], q: &BigInt) -> Vec<BigInt> {
    a.iter().zip(b).map(|(x, y)| x - q * y).collect()
}

/// Iterate over k-element subsets of 0..n in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMat {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMat {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::ShapeMismatch("matrix needs at least one row".into()));
        }
        let cols = rows[0].len();
        if cols == 0 || rows.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch("ragged or empty matrix rows".into()));
        }
        Ok(IntMat {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows_vec(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> IntMat {
        let mut t = IntMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.at(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMat) -> Result<IntMat> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = IntMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut s = BigInt::zero();
                for k in 0..self.cols {
                    s += self.at(i, k) * other.at(k, j);
                }
                out.set(i, j, s);
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Result<Vec<BigInt>> {
        if v.len() != self.cols {
            return Err(Error::ShapeMismatch("vector length != column count".into()));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Determinant via the Bareiss fraction-free algorithm.
    pub fn det(&self) -> Result<BigInt> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch(
                "determinant of non-square matrix".into(),
            ));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut m = self.clone();
        let mut prev = BigInt::one();
        let mut sign = 1i8;
        for k in 0..n - 1 {
            if m.at(k, k).is_zero() {
                match (k + 1..n).find(|&i| !m.at(i, k).is_zero()) {
                    Some(i) => {
                        m.swap_rows(k, i);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = m.at(i, j) * m.at(k, k) - m.at(i, k) * m.at(k, j);
                    debug_assert!((&num % &prev).is_zero());
                    m.set(i, j, num / &prev);
                }
                m.set(i, k, BigInt::zero());
            }
            prev = m.at(k, k).clone();
        }
        let d = m.at(n - 1, n - 1).clone();
        Ok(if sign < 0 { -d } else { d })
    }

    /// Row Hermite normal form H with unimodular transform U, so U * self = H.
    /// Pivots are positive, entries above each pivot lie in [0, pivot), and
    /// zero rows sink to the bottom.
    pub fn hnf_with_transform(&self) -> (IntMat, IntMat) {
        let mut h = self.clone();
        let mut u = IntMat::identity(self.rows);
        let mut r = 0usize;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            // Gcd elimination below row r in column c.
            loop {
                let mut best: Option<(usize, BigInt)> = None;
                for i in r..self.rows {
                    let v = h.at(i, c).abs();
                    if v.is_zero() {
                        continue;
                    }
                    match &best {
                        Some((_, bv)) if *bv <= v => {}
                        _ => best = Some((i, v)),
                    }
                }
                let Some((pivot_row, _)) = best else { break };
                h.swap_rows(r, pivot_row);
                u.swap_rows(r, pivot_row);
                let pivot = h.at(r, c).clone();
                let mut changed = false;
                for i in r + 1..self.rows {
                    if h.at(i, c).is_zero() {
                        continue;
                    }
                    // Round-to-nearest quotient keeps remainders small.
                    let q = nearest_quotient(h.at(i, c), &pivot);
                    if !q.is_zero() {
                        row_op(&mut h, i, r, &q);
                        row_op(&mut u, i, r, &q);
                    }
                    changed = changed || !h.at(i, c).is_zero();
                }
                if !changed {
                    break;
                }
            }
            if h.at(r, c).is_zero() {
                continue;
            }
            if h.at(r, c).is_negative() {
                negate_row(&mut h, r);
                negate_row(&mut u, r);
            }
            let pivot = h.at(r, c).clone();
            for i in 0..r {
                let q = h.at(i, c).div_floor(&pivot);
                if !q.is_zero() {
                    row_op(&mut h, i, r, &q);
                    row_op(&mut u, i, r, &q);
                }
            }
            r += 1;
        }
        (h, u)
    }

    /// Rank over Q.
    pub fn exact_rank(&self) -> usize {
        let (h, _) = self.hnf_with_transform();
        (0..h.rows).filter(|&i| !is_zero_vec(h.row(i))).count()
    }

    /// Basis of the integer kernel {x : self * x = 0}, saturated (any integer
    /// solution is an integer combination of the basis) with canonical signs.
    pub fn kernel_basis(&self) -> Vec<Vec<BigInt>> {
        let (h, u) = self.transpose().hnf_with_transform();
        let rank = (0..h.rows).filter(|&i| !is_zero_vec(h.row(i))).count();
        (rank..h.rows).map(|i| canonical_sign(u.row(i))).collect()
    }

    /// Largest |det| over all s x s minors.
    pub fn max_minor_abs(&self, s: usize) -> Result<BigInt> {
        if s == 0 || s > self.rows || s > self.cols {
            return Err(Error::ShapeMismatch(format!(
                "no {s}x{s} minors in a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let mut best = BigInt::zero();
        for rsel in combinations(self.rows, s) {
            for csel in combinations(self.cols, s) {
                let mut sub = IntMat::zeros(s, s);
                for (a, &i) in rsel.iter().enumerate() {
                    for (b, &j) in csel.iter().enumerate() {
                        sub.set(a, b, self.at(i, j).clone());
                    }
                }
                let d = sub.det()?.abs();
                if d > best {
                    best = d;
                }
            }
        }
        Ok(best)
    }
}

fn row_op(m: &mut IntMat, target: usize, source: usize, q: &BigInt) {
    for j in 0..m.cols {
        let v = m.at(target, j) - q * m.at(source, j);
        m.set(target, j, v);
    }
}

fn negate_row(m: &mut IntMat, i: usize) {
    for j in 0..m.cols {
        let v = -m.at(i, j);
        m.set(i, j, v);
    }
}

/// Quotient rounding a/b to the nearest integer (ties toward even floor).
fn nearest_quotient(a: &BigInt, b: &BigInt) -> BigInt {
    let two_a: BigInt = a << 1;
    let two_b: BigInt = b << 1;
    let shifted: BigInt = two_a + b;
    shifted.div_floor(&two_b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn mat(rows: &[&[i64]]) -> IntMat {
        IntMat::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| bi(v)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn determinants() {
        assert_eq!(mat(&[&[3, 1], &[2, 4]]).det().unwrap(), bi(10));
        assert_eq!(
            mat(&[&[2, 0, 1], &[1, 3, 2], &[1, 1, 3]]).det().unwrap(),
            bi(12)
        );
        assert_eq!(mat(&[&[1, 2], &[2, 4]]).det().unwrap(), bi(0));
        // Needs a row swap to find a pivot.
        assert_eq!(mat(&[&[0, 1], &[1, 0]]).det().unwrap(), bi(-1));
    }

    #[test]
    fn rank_counts_independent_rows() {
        assert_eq!(mat(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]).exact_rank(), 2);
        assert_eq!(mat(&[&[0, 0], &[0, 0]]).exact_rank(), 0);
        assert_eq!(mat(&[&[5]]).exact_rank(), 1);
    }

    #[test]
    fn hnf_transform_is_unimodular() {
        let a = mat(&[&[4, 7, 2], &[6, 3, 9], &[2, 2, 2]]);
        let (h, u) = a.hnf_with_transform();
        assert_eq!(u.mul(&a).unwrap(), h);
        assert_eq!(u.det().unwrap().abs(), bi(1));
        // Row-echelon shape: pivot of each nonzero row strictly right of the
        // previous one, pivots positive.
        let mut last_pivot: Option<usize> = None;
        for i in 0..h.nrows() {
            if is_zero_vec(h.row(i)) {
                continue;
            }
            let p = (0..h.ncols()).find(|&j| !h.at(i, j).is_zero()).unwrap();
            assert!(h.at(i, p).is_positive());
            if let Some(lp) = last_pivot {
                assert!(p > lp);
            }
            last_pivot = Some(p);
        }
    }

    #[test]
    fn kernel_is_saturated() {
        let a = mat(&[&[2, 4, 6]]);
        let k = a.kernel_basis();
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(is_zero_vec(&a.mul_vec(v).unwrap()));
        }
        // x = (1, 1, -1) lies in the kernel; saturation means it is an
        // integer combination of the basis.  Solve the 2x3 system by HNF.
        let basis = IntMat::from_rows(k.clone()).unwrap();
        let target = vec![bi(1), bi(1), bi(-1)];
        assert!(in_row_span(&basis, &target));
        // A primitive kernel vector must appear with content 1.
        for v in &k {
            assert_eq!(content(v), bi(1));
        }
    }

    // Does `target` lie in the integer row span of `m`?
    fn in_row_span(m: &IntMat, target: &[BigInt]) -> bool {
        let (h, _) = m.hnf_with_transform();
        let mut t = target.to_vec();
        for i in 0..h.nrows() {
            if is_zero_vec(h.row(i)) {
                continue;
            }
            let p = (0..h.ncols()).find(|&j| !h.at(i, j).is_zero()).unwrap();
            if t[p].is_zero() {
                continue;
            }
            let (q, r) = t[p].div_rem(h.at(i, p));
            if !r.is_zero() {
                return false;
            }
            t = sub_scaled(&t, h.row(i), &q);
        }
        is_zero_vec(&t)
    }

    #[test]
    fn kernel_of_full_rank_is_empty() {
        let a = mat(&[&[1, 0], &[0, 1]]);
        assert!(a.kernel_basis().is_empty());
    }

    #[test]
    fn kernel_with_bigger_system() {
        let a = mat(&[&[1, 2, 3, 4], &[0, 1, 1, 1]]);
        let k = a.kernel_basis();
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(is_zero_vec(&a.mul_vec(v).unwrap()));
        }
    }

    #[test]
    fn minors_enumerate_all_submatrices() {
        let a = mat(&[&[1, 2, 3], &[4, 5, 6]]);
        // 2x2 minors: |1 2;4 5| = -3, |1 3;4 6| = -6, |2 3;5 6| = -3.
        assert_eq!(a.max_minor_abs(2).unwrap(), bi(6));
        assert_eq!(a.max_minor_abs(1).unwrap(), bi(6));
        assert!(a.max_minor_abs(3).is_err());
    }

    #[test]
    fn combination_counts() {
        assert_eq!(combinations(5, 2).len(), 10);
        assert_eq!(combinations(4, 4).len(), 1);
        assert_eq!(combinations(3, 0).len(), 1);
        assert!(combinations(2, 3).is_empty());
    }
}
