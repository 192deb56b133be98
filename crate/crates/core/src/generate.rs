//! Deterministic matrix generators for experiments and stress runs.
//!
//! Every recipe is fully determined by its fields, so a recorded recipe
//! rebuilds the same matrix bit for bit on any machine.  Random entries
//! come from a counter-based ChaCha20 stream and are stored as decimal
//! literals with an explicit digit budget: if a downstream computation
//! needs more precision than the budget supports, it fails loudly
//! instead of silently reading noise.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::minimal::ThetaMatrix;
use crate::realspec::RealSpec;
use crate::veronese::veronese_system;

/// Name of the digit stream, recorded alongside seeds in reports.
pub const RNG_ALGORITHM: &str = "chacha20";

/// Recipe for a matrix of form coefficients.
#[derive(Clone, Debug, PartialEq)]
pub enum ThetaKind {
    /// Entries drawn digit by digit from a seeded ChaCha20 stream, each
    /// a decimal literal in (0, 1) carrying `digits` trusted digits.
    RandomUniform { seed: u64, digits: u32 },
    /// Entries taken from the given list, row-major.
    Algebraic { entries: Vec<RealSpec> },
    /// One row (xi, xi^2, ..., xi^n) where xi is the Fibonacci-word
    /// continued fraction [0; 1,2,1,1,2,...].  Needs m = 1.
    ExtremalCf,
    /// Square roots of consecutive squarefree integers, starting at an
    /// offset so disjoint grids never share an entry.
    QuadraticGrid { index: u32 },
}

impl ThetaKind {
    pub fn name(&self) -> &'static str {
        match self {
            ThetaKind::RandomUniform { .. } => "random_uniform",
            ThetaKind::Algebraic { .. } => "algebraic",
            ThetaKind::ExtremalCf => "extremal_cf",
            ThetaKind::QuadraticGrid { .. } => "quadratic_grid",
        }
    }

    /// Seed recorded in reports; generators without one report nothing.
    pub fn seed(&self) -> Option<u64> {
        match self {
            ThetaKind::RandomUniform { seed, .. } => Some(*seed),
            _ => None,
        }
    }
}

fn random_decimal(rng: &mut ChaCha20Rng, digits: u32) -> Result<RealSpec> {
    let mut text = String::with_capacity(digits as usize + 2);
    text.push_str("0.");
    let mut all_zero = true;
    for _ in 0..digits {
        let d = (rng.next_u32() % 10) as u8;
        if d != 0 {
            all_zero = false;
        }
        text.push((b'0' + d) as char);
    }
    if all_zero {
        // An exact-zero entry would make the form degenerate; the odds
        // are 10^-digits but the fix is free.
        text.pop();
        text.push('5');
    }
    RealSpec::decimal(&text, digits)
}

fn is_squarefree(c: u64) -> bool {
    let mut d = 2u64;
    while d * d <= c {
        if c % (d * d) == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// The `count` squarefree integers >= 2 after skipping `offset` of them.
fn squarefree_run(offset: u64, count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut seen = 0u64;
    let mut c = 2u64;
    while out.len() < count {
        if is_squarefree(c) {
            if seen >= offset {
                out.push(c);
            }
            seen += 1;
        }
        c += 1;
    }
    out
}

/// Materialize a recipe as an m x n coefficient matrix.
pub fn generate_theta(kind: &ThetaKind, m: usize, n: usize) -> Result<ThetaMatrix> {
    match kind {
        ThetaKind::RandomUniform { seed, digits } => {
            if *digits == 0 {
                return Err(Error::InvalidSpec(
                    "random entries need a positive digit budget".into(),
                ));
            }
            let mut rng = ChaCha20Rng::seed_from_u64(*seed);
            let entries = (0..m * n)
                .map(|_| random_decimal(&mut rng, *digits))
                .collect::<Result<Vec<_>>>()?;
            ThetaMatrix::new(m, n, entries)
        }
        ThetaKind::Algebraic { entries } => ThetaMatrix::new(m, n, entries.clone()),
        ThetaKind::ExtremalCf => {
            if m != 1 {
                return Err(Error::ShapeMismatch(format!(
                    "extremal_cf fills one row of powers, not {m} forms"
                )));
            }
            let xi = RealSpec::parse("cf:fibword(1,2)")?;
            veronese_system(&xi, n)
        }
        ThetaKind::QuadraticGrid { index } => {
            let offset = (*index as u64) * (m * n) as u64;
            let entries = squarefree_run(offset, m * n)
                .into_iter()
                .map(|c| RealSpec::surd(0.into(), 1.into(), c.into(), 1.into()))
                .collect::<Result<Vec<_>>>()?;
            ThetaMatrix::new(m, n, entries)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_matrices_are_reproducible() {
        let kind = ThetaKind::RandomUniform {
            seed: 42,
            digits: 500,
        };
        let a = generate_theta(&kind, 1, 2).unwrap();
        let b = generate_theta(&kind, 1, 2).unwrap();
        for (x, y) in a.entries().iter().zip(b.entries()) {
            assert_eq!(x.to_string(), y.to_string());
        }
        let text = a.entry(0, 0).to_string();
        assert!(text.contains("@500"), "digit budget missing: {text}");
        // A different seed must change the stream.
        let other = generate_theta(
            &ThetaKind::RandomUniform {
                seed: 43,
                digits: 500,
            },
            1,
            2,
        )
        .unwrap();
        assert_ne!(a.entry(0, 0).to_string(), other.entry(0, 0).to_string());
    }

    #[test]
    fn random_entries_stay_inside_unit_interval() {
        let kind = ThetaKind::RandomUniform {
            seed: 7,
            digits: 40,
        };
        let theta = generate_theta(&kind, 2, 2).unwrap();
        for e in theta.entries() {
            let v = e.eval(32).unwrap();
            assert!(v.lo > crate::interval::Rat::from_integer(0.into()));
            assert!(v.hi < crate::interval::Rat::from_integer(1.into()));
        }
    }

    #[test]
    fn extremal_row_is_powers_of_the_base() {
        let theta = generate_theta(&ThetaKind::ExtremalCf, 1, 2).unwrap();
        assert_eq!(theta.nforms(), 1);
        assert_eq!(theta.nvars(), 2);
        let xi = theta.entry(0, 0).eval(96).unwrap();
        let sq = theta.entry(0, 1).eval(96).unwrap();
        assert!(sq.overlaps(&xi.square()));
        assert!(matches!(
            generate_theta(&ThetaKind::ExtremalCf, 2, 1),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn quadratic_grids_are_disjoint() {
        let a = generate_theta(&ThetaKind::QuadraticGrid { index: 0 }, 1, 2).unwrap();
        let b = generate_theta(&ThetaKind::QuadraticGrid { index: 1 }, 1, 2).unwrap();
        assert_eq!(a.entry(0, 0).to_string(), "surd:(0+1*sqrt(2))/1");
        assert_eq!(a.entry(0, 1).to_string(), "surd:(0+1*sqrt(3))/1");
        assert_eq!(b.entry(0, 0).to_string(), "surd:(0+1*sqrt(5))/1");
        assert_eq!(b.entry(0, 1).to_string(), "surd:(0+1*sqrt(6))/1");
        let mut names: Vec<String> = a
            .entries()
            .iter()
            .chain(b.entries())
            .map(|e| e.to_string())
            .collect();
        let total = names.len();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), total);
    }
}
