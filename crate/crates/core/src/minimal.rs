//! Chains of best-approximation ("minimal") integer points for a system of
//! linear forms.
//!
//! For a real m x n matrix T and the extended system (T | Id_m), a point
//! z = (x, y) in Z^(n+m) has error err(z) = max_i |T_i . x + y_i| and height
//! ||z|| = max-norm over all n+m coordinates.  The chain z_1, z_2, ... walks
//! strictly increasing heights and strictly decreasing errors such that z_k
//! has the smallest error among all nonzero points of height <= ||z_k||, and
//! every later improvement has larger height.
//!
//! Two independent backends produce the chain:
//!  * a shell scan that enumerates x in growing max-norm boxes and pairs
//!    each x with its certified optimal y, and
//!  * a lattice search that derives a height bound for the next record from
//!    the pigeonhole guarantee and enumerates a weighted lattice ball.
//! Both only ever emit certified comparisons; undecidable comparisons
//! escalate working precision and abort at the configured cap rather than
//! guess.

use std::cell::RefCell;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::interval::{Interval, Rat};
use crate::intmat::{canonical_sign, inf_norm, is_zero_vec};
use crate::lll::{enumerate_ball, gram_intervals, lll_reduce, round_rat};
use crate::realspec::{CfSpec, RealSpec};

/// The matrix of form coefficients, entries given symbolically.
pub struct ThetaMatrix {
    m: usize,
    n: usize,
    entries: Vec<RealSpec>,
    cache: RefCell<HashMap<u32, Vec<Interval>>>,
}

impl ThetaMatrix {
    pub fn new(m: usize, n: usize, entries: Vec<RealSpec>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::ShapeMismatch(
                "need at least one form and one variable".into(),
            ));
        }
        if entries.len() != m * n {
            return Err(Error::ShapeMismatch(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                m * n,
                m,
                n,
                entries.len()
            )));
        }
        Ok(ThetaMatrix {
            m,
            n,
            entries,
            cache: RefCell::new(HashMap::new()),
        })
    }

    /// Single form in one variable.
    pub fn single(theta: RealSpec) -> Self {
        ThetaMatrix::new(1, 1, vec![theta]).expect("1x1 shape")
    }

    pub fn nforms(&self) -> usize {
        self.m
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n + self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> &RealSpec {
        &self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[RealSpec] {
        &self.entries
    }

    fn with_entries<T>(&self, prec: u32, f: impl FnOnce(&[Interval]) -> Result<T>) -> Result<T> {
        {
            let cache = self.cache.borrow();
            if let Some(vals) = cache.get(&prec) {
                return f(vals);
            }
        }
        let vals: Vec<Interval> = self
            .entries
            .iter()
            .map(|e| e.eval(prec))
            .collect::<Result<_>>()?;
        let mut cache = self.cache.borrow_mut();
        // Keep the cache bounded: only the widest two precisions matter.
        if cache.len() > 6 {
            let min_key = *cache.keys().min().expect("nonempty");
            cache.remove(&min_key);
        }
        let out = f(&vals);
        cache.insert(prec, vals);
        out
    }

    /// Enclosures of the m form values L_i(z) for z = (x, y).
    pub fn form_values(&self, z: &[BigInt], prec: u32) -> Result<Vec<Interval>> {
        if z.len() != self.dim() {
            return Err(Error::ShapeMismatch("point has wrong dimension".into()));
        }
        let (x, y) = z.split_at(self.n);
        self.with_entries(prec, |vals| {
            let mut out = Vec::with_capacity(self.m);
            for i in 0..self.m {
                let mut s = Interval::point(Rat::from_integer(y[i].clone()));
                for (j, xj) in x.iter().enumerate() {
                    if xj.is_zero() {
                        continue;
                    }
                    s = s.add(&vals[i * self.n + j].scale(&Rat::from_integer(xj.clone())));
                }
                out.push(s);
            }
            Ok(out)
        })
    }

    /// Certified enclosure of err(z) = max_i |L_i(z)|.
    pub fn error_enclosure(&self, z: &[BigInt], prec: u32) -> Result<Interval> {
        let forms = self.form_values(z, prec)?;
        let mut acc = Interval::zero();
        for (i, f) in forms.iter().enumerate() {
            let a = f.abs();
            acc = if i == 0 { a } else { acc.max(&a) };
        }
        Ok(acc)
    }

    /// The integer y minimizing err for a fixed x, when certifiable.
    pub fn optimal_y(&self, x: &[BigInt], prec: u32) -> Result<Vec<BigInt>> {
        if x.len() != self.n {
            return Err(Error::ShapeMismatch("x has wrong dimension".into()));
        }
        self.with_entries(prec, |vals| {
            let mut y = Vec::with_capacity(self.m);
            for i in 0..self.m {
                let mut s = Interval::zero();
                for (j, xj) in x.iter().enumerate() {
                    if xj.is_zero() {
                        continue;
                    }
                    s = s.add(&vals[i * self.n + j].scale(&Rat::from_integer(xj.clone())));
                }
                match s.round_unique() {
                    Some(r) => y.push(-r),
                    None => {
                        return Err(Error::NeedsPrecision(format!(
                            "optimal companion for form {i} undecided"
                        )))
                    }
                }
            }
            Ok(y)
        })
    }

    /// Integer upper bound for 1 + max_i sum_j |T_ij|, used to convert a
    /// bound on x into a bound on the full point.
    pub fn row_growth_bound(&self) -> Result<BigInt> {
        self.with_entries(16, |vals| {
            let mut best = BigInt::zero();
            for i in 0..self.m {
                let mut s = Interval::zero();
                for j in 0..self.n {
                    s = s.add(&vals[i * self.n + j].abs());
                }
                let c = s.hi.ceil().to_integer();
                if c > best {
                    best = c;
                }
            }
            Ok(best + BigInt::one())
        })
    }
}

/// One link of the chain.
#[derive(Clone, Debug)]
pub struct MinimalPoint {
    /// 1-based position in the chain.
    pub k: usize,
    /// Coordinates (x_1 .. x_n, y_1 .. y_m), sign-canonical.
    pub z: Vec<BigInt>,
    /// Max-norm over all coordinates.
    pub norm: BigInt,
    /// Certified enclosure of the form error; positive except for a final
    /// exact-zero point of a rational system.
    pub err: Interval,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    /// Shell scan for small heights, lattice search beyond.
    Auto,
    /// Shell scan only.
    BruteForce,
    /// Lattice search only (after the height-1 start).
    Lattice,
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub precision_start: u32,
    pub precision_cap: u32,
    pub node_limit: u64,
    pub backend: Backend,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            precision_start: 64,
            precision_cap: 4096,
            node_limit: 1_000_000,
            backend: Backend::Auto,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SequenceRequest {
    /// Stop once this many points are known.
    pub count: Option<usize>,
    /// Stop before any point whose height would exceed this.
    pub max_norm: Option<BigInt>,
}

impl SequenceRequest {
    pub fn with_count(count: usize) -> Self {
        SequenceRequest {
            count: Some(count),
            max_norm: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MinimalChain {
    pub points: Vec<MinimalPoint>,
    /// True when the chain ended with an exact-zero error (rational system);
    /// no further points exist.
    pub complete: bool,
}

/// Height ceiling for the automatic shell scan, by x-dimension.
fn auto_shell_limit(n: usize) -> i64 {
    match n {
        1 => 256,
        2 => 48,
        3 => 16,
        _ => 8,
    }
}

struct Engine<'a> {
    theta: &'a ThetaMatrix,
    cfg: &'a EngineConfig,
    w: u32,
}

struct Candidate {
    z: Vec<BigInt>,
    norm: BigInt,
    err: Interval,
}

enum ShellOutcome {
    Found(Candidate),
    NoImprover,
    Undecided,
}

impl<'a> Engine<'a> {
    fn new(theta: &'a ThetaMatrix, cfg: &'a EngineConfig) -> Self {
        Engine {
            theta,
            cfg,
            w: cfg.precision_start.max(16),
        }
    }

    fn escalate(&mut self, context: &str) -> Result<()> {
        if self.w >= self.cfg.precision_cap {
            return Err(Error::PrecisionExhausted {
                context: context.to_string(),
                cap_bits: self.cfg.precision_cap,
            });
        }
        self.w = (self.w.saturating_mul(2)).min(self.cfg.precision_cap);
        Ok(())
    }

    /// Refine an error enclosure until it is strictly positive or exactly
    /// zero, so stored intervals are always usable downstream.
    fn pin_sign(&mut self, z: &[BigInt], mut err: Interval) -> Result<Interval> {
        loop {
            if err.is_positive() || err.is_exact_zero() {
                return Ok(err);
            }
            self.escalate("separating a form error from zero")?;
            err = self.theta.error_enclosure(z, self.w)?;
        }
    }

    /// Scan one shell ||z|| = h.  `record` is the current error to beat
    /// (None on the first point, where the minimum over the shell wins).
    fn scan_shell(&mut self, h: i64, record: Option<&Interval>) -> Result<ShellOutcome> {
        let mut sure: Vec<Candidate> = Vec::new();
        let mut undecided = false;
        let h_big = BigInt::from(h);

        let consider = |eng_w: u32,
                        theta: &ThetaMatrix,
                        z: Vec<BigInt>,
                        sure: &mut Vec<Candidate>,
                        undecided: &mut bool|
         -> Result<()> {
            let err = theta.error_enclosure(&z, eng_w)?;
            match record {
                None => sure.push(Candidate {
                    norm: inf_norm(&z),
                    z,
                    err,
                }),
                Some(rec) => {
                    if err.hi < rec.lo {
                        sure.push(Candidate {
                            norm: inf_norm(&z),
                            z,
                            err,
                        });
                    } else if rec.hi <= err.lo {
                        // certifiably not an improvement
                    } else if err.width().is_zero() && rec.width().is_zero() {
                        // both exact and equal: not a strict improvement
                    } else {
                        *undecided = true;
                    }
                }
            }
            Ok(())
        };

        // Pure companion points (x = 0) only matter on the first shell.
        if record.is_none() && h == 1 {
            for i in 0..self.theta.m {
                let mut z = vec![BigInt::zero(); self.theta.dim()];
                z[self.theta.n + i] = BigInt::one();
                consider(self.w, self.theta, z, &mut sure, &mut undecided)?;
            }
        }

        let n = self.theta.n;
        let mut x = vec![0i64; n];
        let mut stack_err: Option<Error> = None;
        enumerate_canonical_box(&mut x, 0, h, false, &mut |xs: &[i64]| {
            let x_big: Vec<BigInt> = xs.iter().map(|&v| BigInt::from(v)).collect();
            let y = match self.theta.optimal_y(&x_big, self.w) {
                Ok(y) => y,
                Err(e) => {
                    stack_err = Some(e);
                    return false;
                }
            };
            let y_clamped: Vec<BigInt> = y
                .into_iter()
                .map(|v| {
                    if v > h_big {
                        h_big.clone()
                    } else if v < -&h_big {
                        -h_big.clone()
                    } else {
                        v
                    }
                })
                .collect();
            let mut z = x_big;
            z.extend(y_clamped);
            if inf_norm(&z) != h_big {
                return true;
            }
            if let Err(e) = consider(self.w, self.theta, z, &mut sure, &mut undecided) {
                stack_err = Some(e);
                return false;
            }
            true
        });
        if let Some(e) = stack_err {
            return Err(e);
        }

        if undecided {
            return Ok(ShellOutcome::Undecided);
        }
        if sure.is_empty() {
            return Ok(ShellOutcome::NoImprover);
        }
        match select_min_error(sure)? {
            Some(best) => Ok(ShellOutcome::Found(best)),
            None => Ok(ShellOutcome::Undecided),
        }
    }

    /// First chain point: minimum over the shell h = 1.
    fn first_point(&mut self) -> Result<MinimalPoint> {
        loop {
            match self.scan_shell(1, None) {
                Ok(ShellOutcome::Found(c)) => {
                    let err = self.pin_sign(&c.z, c.err)?;
                    return Ok(MinimalPoint {
                        k: 1,
                        z: c.z,
                        norm: c.norm,
                        err,
                    });
                }
                Ok(ShellOutcome::Undecided) => self.escalate("selecting the first chain point")?,
                Ok(ShellOutcome::NoImprover) => {
                    return Err(Error::Internal("empty first shell".into()))
                }
                Err(Error::NeedsPrecision(ctx)) => self.escalate(&ctx)?,
                Err(e) => return Err(e),
            }
        }
    }

    /// Next point via shell scanning from height `from`, up to `limit`
    /// inclusive (None = unbounded).
    fn next_by_shells(
        &mut self,
        record: &MinimalPoint,
        from: i64,
        limit: Option<i64>,
    ) -> Result<Option<Candidate>> {
        let mut h = from;
        loop {
            if let Some(l) = limit {
                if h > l {
                    return Ok(None);
                }
            }
            let rec_err = self.theta.error_enclosure(&record.z, self.w)?;
            match self.scan_shell(h, Some(&rec_err)) {
                Ok(ShellOutcome::Found(c)) => return Ok(Some(c)),
                Ok(ShellOutcome::NoImprover) => h += 1,
                Ok(ShellOutcome::Undecided) => {
                    self.escalate(&format!("separating candidates on shell {h}"))?
                }
                Err(Error::NeedsPrecision(ctx)) => self.escalate(&ctx)?,
                Err(e) => return Err(e),
            }
        }
    }

    /// Next point via the certified lattice search.
    fn next_by_lattice(&mut self, record: &MinimalPoint) -> Result<Candidate> {
        loop {
            match self.lattice_attempt(record) {
                Ok(c) => return Ok(c),
                Err(Error::NeedsPrecision(ctx)) => self.escalate(&ctx)?,
                Err(e) => return Err(e),
            }
        }
    }

    fn lattice_attempt(&mut self, record: &MinimalPoint) -> Result<Candidate> {
        let n = self.theta.n;
        let m = self.theta.m;
        let dim = n + m;
        let rec_err = self.theta.error_enclosure(&record.z, self.w)?;
        if rec_err.is_exact_zero() {
            return Err(Error::Internal(
                "lattice step after a final exact-zero point".into(),
            ));
        }
        if !rec_err.is_positive() {
            return Err(Error::NeedsPrecision(
                "record error enclosure touches zero".into(),
            ));
        }
        // Demand a relatively tight record before trusting derived bounds.
        let rel = &rec_err.width() * Rat::from_integer(BigInt::from(16));
        if rel > rec_err.lo {
            return Err(Error::NeedsPrecision(
                "record error enclosure too loose".into(),
            ));
        }
        let e_lo = rec_err.lo.clone();
        let eps = rec_err.hi.clone();

        // Smallest B with B^n * e_lo^m > 1: a point of error < e_lo exists
        // with ||x|| <= B by the pigeonhole bound.
        let r = rat_pow(&e_lo.recip(), m as u32);
        let floor_r: BigInt = r.numer().div_floor(r.denom());
        let b = floor_r.nth_root(n as u32) + BigInt::one();
        let growth = self.theta.row_growth_bound()?;
        let nb = &b * &growth;

        // Working precision must resolve 1/eps-scaled entries even after
        // they are recombined with transform coefficients of size ~NB.
        let inv_eps_bits = rat_mag_bits(&eps.recip());
        let needed = inv_eps_bits
            .saturating_add(nb.bits() as u32)
            .saturating_add(48);
        if self.w < needed {
            return Err(Error::NeedsPrecision(
                "forms need more bits than the error scale".into(),
            ));
        }

        // True rows of the weighted embedding: unit x_j maps to
        // (e_j/NB | column of T_ij / eps), unit y_i maps to (0 | e_i / eps).
        let nb_rat = Rat::from_integer(nb.clone());
        let eps_inv = eps.recip();
        let rows: Vec<Vec<Interval>> = self.theta.with_entries(self.w, |vals| {
            let mut rows = Vec::with_capacity(dim);
            for j in 0..n {
                let mut row = vec![Interval::zero(); dim];
                row[j] = Interval::point(nb_rat.recip());
                for i in 0..m {
                    row[n + i] = vals[i * n + j].scale(&eps_inv);
                }
                rows.push(row);
            }
            for i in 0..m {
                let mut row = vec![Interval::zero(); dim];
                row[n + i] = Interval::point(eps_inv.clone());
                rows.push(row);
            }
            Ok(rows)
        })?;

        // Proxy reduction on a scaled midpoint snapshot; only quality, not
        // correctness, depends on this step.
        let scale_bits = 64 + nb.bits() as u32 + inv_eps_bits;
        let scale = Rat::from_integer(BigInt::one() << scale_bits as usize);
        let proxy: Vec<Vec<BigInt>> = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|iv| round_rat(&(iv.mid() * &scale)))
                    .collect()
            })
            .collect();
        let reduction = match lll_reduce(proxy) {
            Ok(r) => r,
            Err(Error::DependentInput) => {
                return Err(Error::NeedsPrecision(
                    "proxy basis collapsed under rounding".into(),
                ))
            }
            Err(e) => return Err(e),
        };

        // Carry the unimodular transform to the true interval rows.
        let reduced_rows: Vec<Vec<Interval>> = reduction
            .transform
            .iter()
            .map(|coeffs| {
                let mut acc = vec![Interval::zero(); dim];
                for (c, row) in coeffs.iter().zip(&rows) {
                    if c.is_zero() {
                        continue;
                    }
                    let f = Rat::from_integer(c.clone());
                    for (a, r) in acc.iter_mut().zip(row) {
                        *a = a.add(&r.scale(&f));
                    }
                }
                acc
            })
            .collect();

        let gram = gram_intervals(&reduced_rows, 128);
        let radius = Rat::from_integer(BigInt::from(dim as i64));
        let coeff_vecs = enumerate_ball(&gram, &radius, 96, self.cfg.node_limit)?;

        // Map coefficients back to integer points and classify.
        let mut sure: Vec<Candidate> = Vec::new();
        let mut undecided = false;
        for c in coeff_vecs {
            let mut z = vec![BigInt::zero(); dim];
            for (ci, trow) in c.iter().zip(&reduction.transform) {
                if ci.is_zero() {
                    continue;
                }
                for (zj, tj) in z.iter_mut().zip(trow) {
                    *zj += ci * tj;
                }
            }
            if is_zero_vec(&z) {
                continue;
            }
            let z = canonical_sign(&z);
            if z == record.z {
                continue; // the record itself always sits inside the ball
            }
            let norm = inf_norm(&z);
            let err = self.theta.error_enclosure(&z, self.w)?;
            if err.hi < rec_err.lo {
                sure.push(Candidate { z, norm, err });
            } else if rec_err.hi <= err.lo {
                // not an improvement
            } else if err.width().is_zero() && rec_err.width().is_zero() {
                // exact equality: not strict
            } else {
                undecided = true;
            }
        }
        if undecided {
            return Err(Error::NeedsPrecision(
                "candidate errors overlap the record".into(),
            ));
        }
        if sure.is_empty() {
            return Err(Error::Internal(
                "lattice ball contained no improvement; bound derivation broken".into(),
            ));
        }
        // Smallest height first, then smallest error at that height.
        let min_norm = sure.iter().map(|c| c.norm.clone()).min().expect("nonempty");
        if min_norm <= record.norm {
            return Err(Error::Internal(
                "found an improvement at or below the record height".into(),
            ));
        }
        let at_min: Vec<Candidate> = sure.into_iter().filter(|c| c.norm == min_norm).collect();
        match select_min_error(at_min)? {
            Some(best) => Ok(best),
            None => Err(Error::NeedsPrecision(
                "tie candidates need separation".into(),
            )),
        }
    }
}

/// Pick the candidate with certifiably smallest error.  Ok(None) requests
/// precision escalation; exact unresolvable ties abort.
///
/// Two passes: first find the smallest certified upper bound on the minimum,
/// then keep only candidates whose error could still reach it.  Ties away
/// from the minimum are irrelevant and must not abort the chain.
fn select_min_error(cands: Vec<Candidate>) -> Result<Option<Candidate>> {
    if cands.is_empty() {
        return Err(Error::Internal("empty candidate set".into()));
    }
    let ub = cands
        .iter()
        .map(|c| c.err.hi.clone())
        .min()
        .expect("nonempty");
    let mut live: Vec<Candidate> = cands.into_iter().filter(|c| c.err.lo <= ub).collect();
    if live.len() == 1 {
        return Ok(live.pop().map(Some).expect("one element"));
    }
    // Several candidates still overlap the minimum.  If every survivor has
    // an exact error they all equal the bound, which is a genuine tie on
    // distinct points; otherwise ask for more precision.
    if live.iter().all(|c| c.err.width().is_zero()) {
        let a = &live[0];
        let b = &live[1];
        return Err(Error::MinimalityTie(format!(
            "points {:?} and {:?} share the exact error {}",
            a.z, b.z, a.err.lo
        )));
    }
    Ok(None)
}

/// Depth-first walk over x in the box ||x||_inf <= h with the first nonzero
/// coordinate positive (one of each +-pair, zero excluded).  The callback
/// returns false to abort the walk.
fn enumerate_canonical_box(
    x: &mut Vec<i64>,
    idx: usize,
    h: i64,
    started: bool,
    f: &mut impl FnMut(&[i64]) -> bool,
) -> bool {
    if idx == x.len() {
        if started {
            return f(x);
        }
        return true;
    }
    let lo = if started { -h } else { 0 };
    for v in lo..=h {
        x[idx] = v;
        if !enumerate_canonical_box(x, idx + 1, h, started || v != 0, f) {
            return false;
        }
    }
    x[idx] = 0;
    true
}

fn rat_pow(r: &Rat, e: u32) -> Rat {
    let mut acc = Rat::one();
    for _ in 0..e {
        acc *= r;
    }
    acc
}

/// Bits needed to write down |r| (0 for |r| <= 1).
fn rat_mag_bits(r: &Rat) -> u32 {
    let a = r.abs();
    let c: BigInt = a.ceil().to_integer();
    c.bits() as u32
}

/// Compute the chain of minimal points for `theta`.
pub fn minimal_point_sequence(
    theta: &ThetaMatrix,
    req: &SequenceRequest,
    cfg: &EngineConfig,
) -> Result<MinimalChain> {
    let mut eng = Engine::new(theta, cfg);
    let mut points: Vec<MinimalPoint> = Vec::new();
    let mut complete = false;

    let first = eng.first_point()?;
    let first_in_budget = req
        .max_norm
        .as_ref()
        .map(|mn| first.norm <= *mn)
        .unwrap_or(true);
    if first_in_budget {
        points.push(first);
    }

    loop {
        if points.is_empty() {
            break;
        }
        if let Some(cnt) = req.count {
            if points.len() >= cnt {
                break;
            }
        }
        let record = points.last().expect("nonempty").clone();
        if record.err.is_exact_zero() {
            complete = true;
            break;
        }
        let from = match record.norm.to_i64() {
            Some(v) => v + 1,
            None => i64::MAX,
        };
        if let Some(mn) = &req.max_norm {
            if &record.norm >= mn {
                break;
            }
        }

        let next: Candidate = match cfg.backend {
            Backend::BruteForce => {
                if record.norm.to_i64().is_none() {
                    return Err(Error::Internal(
                        "shell scan cannot continue past i64 heights".into(),
                    ));
                }
                let limit = req
                    .max_norm
                    .as_ref()
                    .map(|mn| mn.to_i64().unwrap_or(i64::MAX));
                match eng.next_by_shells(&record, from, limit)? {
                    Some(c) => c,
                    None => break, // height budget exhausted without improvement
                }
            }
            Backend::Lattice => eng.next_by_lattice(&record)?,
            Backend::Auto => {
                let shell_cap = auto_shell_limit(theta.n);
                if from <= shell_cap {
                    match eng.next_by_shells(&record, from, Some(shell_cap))? {
                        Some(c) => c,
                        None => eng.next_by_lattice(&record)?,
                    }
                } else {
                    eng.next_by_lattice(&record)?
                }
            }
        };

        if let Some(mn) = &req.max_norm {
            if &next.norm > mn {
                break;
            }
        }
        let err = eng.pin_sign(&next.z, next.err)?;
        points.push(MinimalPoint {
            k: points.len() + 1,
            z: next.z,
            norm: next.norm,
            err,
        });
    }

    if let Some(last) = points.last() {
        if last.err.is_exact_zero() {
            complete = true;
        }
    }
    Ok(MinimalChain { points, complete })
}

/// Independent oracle for the single-form, single-variable case: minimal
/// points are exactly the record heights among continued-fraction
/// convergents (including the formal (0, 1) start).  Valid for positive
/// numbers; does not share any machinery with the chain engine.
pub fn cf_convergent_oracle(
    theta: &RealSpec,
    count: usize,
    cfg: &EngineConfig,
) -> Result<MinimalChain> {
    if count == 0 {
        return Ok(MinimalChain {
            points: Vec::new(),
            complete: false,
        });
    }
    let probe = theta.eval(32)?;
    if !probe.is_positive() {
        return Err(Error::NotApplicable(
            "convergent oracle needs a positive number".into(),
        ));
    }

    let mut quot_src = QuotientSource::new(theta, cfg)?;
    // Convergent state: (p_{-2}, q_{-2}) = (0, 1), (p_{-1}, q_{-1}) = (1, 0).
    let mut p2 = BigInt::zero();
    let mut p1 = BigInt::one();
    let mut q2 = BigInt::one();
    let mut q1 = BigInt::zero();

    // Seed with the formal point (0, 1): err exactly 1 at height 1.
    let mut out: Vec<(Vec<BigInt>, BigInt, Interval)> = vec![(
        vec![BigInt::zero(), BigInt::one()],
        BigInt::one(),
        Interval::point(Rat::one()),
    )];
    let mut complete = false;

    while out.len() <= count {
        let a = match quot_src.next_quotient(&p1, &q1, &p2, &q2)? {
            Some(a) => a,
            None => {
                complete = true;
                break;
            }
        };
        let p = &a * &p1 + &p2;
        let q = &a * &q1 + &q2;
        p2 = std::mem::replace(&mut p1, p.clone());
        q2 = std::mem::replace(&mut q1, q.clone());

        let z = canonical_sign(&[q.clone(), -p.clone()]);
        let norm = inf_norm(&z);
        let err = quot_src.error_of(&z)?;
        if err.is_exact_zero() {
            // theta is exactly p/q: final point.
            replace_or_push(&mut out, z, norm, err);
            complete = true;
            break;
        }
        replace_or_push(&mut out, z, norm, err);
    }

    let mut points: Vec<MinimalPoint> = out
        .into_iter()
        .take(count)
        .enumerate()
        .map(|(i, (z, norm, err))| MinimalPoint {
            k: i + 1,
            z,
            norm,
            err,
        })
        .collect();
    // Chain sanity: strictly increasing heights, decreasing errors.
    for i in 1..points.len() {
        if points[i].norm <= points[i - 1].norm {
            return Err(Error::Internal("oracle heights not increasing".into()));
        }
    }
    if complete && points.len() < count {
        // fine: rational numbers have finite chains
    }
    points.shrink_to_fit();
    Ok(MinimalChain { points, complete })
}

fn replace_or_push(
    out: &mut Vec<(Vec<BigInt>, BigInt, Interval)>,
    z: Vec<BigInt>,
    norm: BigInt,
    err: Interval,
) {
    if let Some(last) = out.last() {
        if last.1 == norm {
            out.pop();
        }
    }
    out.push((z, norm, err));
}

/// Lazy partial-quotient stream: direct for continued-fraction specs,
/// otherwise extracted through certified floors of complete quotients.
struct QuotientSource<'a> {
    theta: &'a RealSpec,
    cfg: &'a EngineConfig,
    w: u32,
    direct: Option<(Vec<BigInt>, usize)>,
    fib: Option<(u64, u64, usize)>,
    exhausted: bool,
}

impl<'a> QuotientSource<'a> {
    fn new(theta: &'a RealSpec, cfg: &'a EngineConfig) -> Result<Self> {
        let (direct, fib) = match theta {
            RealSpec::ContinuedFraction(CfSpec::Explicit(q)) => (Some((q.clone(), 0usize)), None),
            RealSpec::ContinuedFraction(CfSpec::FibWord { a, b }) => (None, Some((*a, *b, 0usize))),
            _ => (None, None),
        };
        Ok(QuotientSource {
            theta,
            cfg,
            w: cfg.precision_start.max(16),
            direct,
            fib,
            exhausted: false,
        })
    }

    fn escalate(&mut self, context: &str) -> Result<()> {
        if self.w >= self.cfg.precision_cap {
            return Err(Error::PrecisionExhausted {
                context: context.to_string(),
                cap_bits: self.cfg.precision_cap,
            });
        }
        self.w = (self.w.saturating_mul(2)).min(self.cfg.precision_cap);
        Ok(())
    }

    /// Next partial quotient, or None when the expansion terminates.
    fn next_quotient(
        &mut self,
        p1: &BigInt,
        q1: &BigInt,
        p2: &BigInt,
        q2: &BigInt,
    ) -> Result<Option<BigInt>> {
        if self.exhausted {
            return Ok(None);
        }
        if let Some((quots, cursor)) = &mut self.direct {
            if *cursor >= quots.len() {
                self.exhausted = true;
                return Ok(None);
            }
            let a = quots[*cursor].clone();
            *cursor += 1;
            return Ok(Some(a));
        }
        if let Some((a, b, cursor)) = &mut self.fib {
            let idx = *cursor;
            *cursor += 1;
            if idx == 0 {
                return Ok(Some(BigInt::zero()));
            }
            let letters = crate::realspec::fib_word(*a, *b, idx);
            return Ok(Some(BigInt::from(letters[idx - 1])));
        }
        // Extraction: the next complete quotient is
        //   xi = -(q2*theta - p2) / (q1*theta - p1)
        // with the current convergent state; its floor is the quotient.
        loop {
            let t = self.theta.eval(self.w)?;
            let den = t
                .scale(&Rat::from_integer(q1.clone()))
                .sub(&Interval::point(Rat::from_integer(p1.clone())));
            if den.is_exact_zero() {
                self.exhausted = true;
                return Ok(None);
            }
            let num = t
                .scale(&Rat::from_integer(q2.clone()))
                .sub(&Interval::point(Rat::from_integer(p2.clone())))
                .neg();
            if den.contains_zero() {
                self.escalate("separating a convergent remainder from zero")?;
                continue;
            }
            let xi = num.div(&den)?;
            match xi.floor_unique() {
                Some(a) => {
                    // First quotient may be any integer; later ones must be
                    // positive for a well-formed expansion.
                    return Ok(Some(a));
                }
                None => self.escalate("resolving a partial quotient")?,
            }
        }
    }

    /// Certified error |q*theta - p| for z = (x, y) = (q, -p), refined until
    /// sign-pinned.
    fn error_of(&mut self, z: &[BigInt]) -> Result<Interval> {
        loop {
            let t = self.theta.eval(self.w)?;
            let v = t
                .scale(&Rat::from_integer(z[0].clone()))
                .add(&Interval::point(Rat::from_integer(z[1].clone())));
            let err = v.abs();
            if err.is_positive() || err.is_exact_zero() {
                return Ok(err);
            }
            self.escalate("pinning a convergent error away from zero")?;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> EngineConfig {
        EngineConfig::default()
    }

    fn zi(vals: &[i64]) -> Vec<BigInt> {
        vals.iter().map(|&v| BigInt::from(v)).collect()
    }

    fn chain_z(chain: &MinimalChain) -> Vec<Vec<BigInt>> {
        chain.points.iter().map(|p| p.z.clone()).collect()
    }

    #[test]
    fn golden_ratio_chain_bruteforce() {
        let theta = ThetaMatrix::single(RealSpec::parse("surd:(1+1*sqrt(5))/2").unwrap());
        let mut c = cfg();
        c.backend = Backend::BruteForce;
        let chain = minimal_point_sequence(&theta, &SequenceRequest::with_count(5), &c).unwrap();
        assert_eq!(
            chain_z(&chain),
            vec![
                zi(&[1, -1]),
                zi(&[1, -2]),
                zi(&[2, -3]),
                zi(&[3, -5]),
                zi(&[5, -8])
            ]
        );
        let norms: Vec<i64> = chain
            .points
            .iter()
            .map(|p| p.norm.to_i64().unwrap())
            .collect();
        assert_eq!(norms, vec![1, 2, 3, 5, 8]);
        assert!(!chain.complete);
        // Errors strictly decrease.
        for w in chain.points.windows(2) {
            assert!(w[1].err.hi < w[0].err.lo);
        }
    }

    #[test]
    fn sqrt2_chain_matches_convergents() {
        let theta = ThetaMatrix::single(RealSpec::parse("surd:(0+1*sqrt(2))/1").unwrap());
        let mut c = cfg();
        c.backend = Backend::BruteForce;
        let chain = minimal_point_sequence(&theta, &SequenceRequest::with_count(4), &c).unwrap();
        assert_eq!(
            chain_z(&chain),
            vec![zi(&[1, -1]), zi(&[2, -3]), zi(&[5, -7]), zi(&[12, -17])]
        );
    }

    #[test]
    fn lattice_backend_agrees_on_golden_ratio() {
        let theta = ThetaMatrix::single(RealSpec::parse("surd:(1+1*sqrt(5))/2").unwrap());
        let mut c = cfg();
        c.backend = Backend::Lattice;
        let chain = minimal_point_sequence(&theta, &SequenceRequest::with_count(6), &c).unwrap();
        assert_eq!(
            chain_z(&chain),
            vec![
                zi(&[1, -1]),
                zi(&[1, -2]),
                zi(&[2, -3]),
                zi(&[3, -5]),
                zi(&[5, -8]),
                zi(&[8, -13])
            ]
        );
    }

    #[test]
    fn rational_chain_completes() {
        let theta = ThetaMatrix::single(RealSpec::parse("rat:7/5").unwrap());
        let mut c = cfg();
        c.backend = Backend::BruteForce;
        let chain = minimal_point_sequence(&theta, &SequenceRequest::with_count(10), &c).unwrap();
        assert!(chain.complete);
        let last = chain.points.last().unwrap();
        assert!(last.err.is_exact_zero());
        assert_eq!(last.z, zi(&[5, -7]));
    }

    #[test]
    fn max_norm_stops_chain() {
        let theta = ThetaMatrix::single(RealSpec::parse("surd:(1+1*sqrt(5))/2").unwrap());
        let mut c = cfg();
        c.backend = Backend::BruteForce;
        let req = SequenceRequest {
            count: None,
            max_norm: Some(BigInt::from(5)),
        };
        let chain = minimal_point_sequence(&theta, &req, &c).unwrap();
        let norms: Vec<i64> = chain
            .points
            .iter()
            .map(|p| p.norm.to_i64().unwrap())
            .collect();
        assert_eq!(norms, vec![1, 2, 3, 5]);
    }

    #[test]
    fn oracle_matches_engine_for_golden_ratio() {
        let spec = RealSpec::parse("surd:(1+1*sqrt(5))/2").unwrap();
        let oracle = cf_convergent_oracle(&spec, 5, &cfg()).unwrap();
        let theta = ThetaMatrix::single(spec);
        let chain =
            minimal_point_sequence(&theta, &SequenceRequest::with_count(5), &cfg()).unwrap();
        assert_eq!(chain_z(&oracle), chain_z(&chain));
        for (a, b) in oracle.points.iter().zip(&chain.points) {
            assert_eq!(a.norm, b.norm);
            assert!(a.err.overlaps(&b.err));
        }
    }

    #[test]
    fn oracle_handles_numbers_above_two() {
        // 1 + sqrt(2) = [2; 2, 2, ...]; convergents 2/1, 5/2, 12/5, ...
        let spec = RealSpec::parse("surd:(1+1*sqrt(2))/1").unwrap();
        let oracle = cf_convergent_oracle(&spec, 4, &cfg()).unwrap();
        assert_eq!(
            chain_z(&oracle),
            vec![zi(&[0, 1]), zi(&[1, -2]), zi(&[2, -5]), zi(&[5, -12])]
        );
    }

    #[test]
    fn two_form_system_has_valid_chain() {
        // theta = (cbrt(2), cbrt(4)) as a 2x1 system: m = 2, n = 1.
        let t1 = RealSpec::parse("alg:[-2,0,0,1]@[1,2]").unwrap();
        let t2 = RealSpec::parse("alg:[-4,0,0,1]@[1,2]").unwrap();
        let theta = ThetaMatrix::new(2, 1, vec![t1, t2]).unwrap();
        let chain =
            minimal_point_sequence(&theta, &SequenceRequest::with_count(4), &cfg()).unwrap();
        assert_eq!(chain.points.len(), 4);
        for w in chain.points.windows(2) {
            assert!(w[0].norm < w[1].norm, "heights must increase");
            assert!(w[1].err.hi < w[0].err.lo, "errors must decrease");
        }
        // Each point's error must be certified below every smaller-height
        // competitor's (spot-check minimality against a direct shell scan).
        let p2 = &chain.points[1];
        let theta_err = theta.error_enclosure(&p2.z, 128).unwrap();
        assert!(theta_err.overlaps(&p2.err));
    }

    #[test]
    fn two_var_system_has_valid_chain() {
        // theta = (cbrt(2), cbrt(4)) as a 1x2 system: m = 1, n = 2.
        let t1 = RealSpec::parse("alg:[-2,0,0,1]@[1,2]").unwrap();
        let t2 = RealSpec::parse("alg:[-4,0,0,1]@[1,2]").unwrap();
        let theta = ThetaMatrix::new(1, 2, vec![t1, t2]).unwrap();
        let chain =
            minimal_point_sequence(&theta, &SequenceRequest::with_count(5), &cfg()).unwrap();
        assert_eq!(chain.points.len(), 5);
        for w in chain.points.windows(2) {
            assert!(w[0].norm < w[1].norm);
            assert!(w[1].err.hi < w[0].err.lo);
        }
    }

    #[test]
    fn exact_tie_at_minimum_aborts() {
        // theta = (1/4, 1/2): at height 1 both x = (1,0) and x = (1,1)
        // reach the exact error 1/4, so no chain exists.
        let t1 = RealSpec::parse("rat:1/4").unwrap();
        let t2 = RealSpec::parse("rat:1/2").unwrap();
        let theta = ThetaMatrix::new(1, 2, vec![t1, t2]).unwrap();
        let res = minimal_point_sequence(&theta, &SequenceRequest::with_count(3), &cfg());
        assert!(matches!(res, Err(Error::MinimalityTie(_))), "{res:?}");
    }

    #[test]
    fn canonical_box_enumeration() {
        let mut seen = Vec::new();
        let mut x = vec![0i64; 2];
        enumerate_canonical_box(&mut x, 0, 1, false, &mut |xs| {
            seen.push(xs.to_vec());
            true
        });
        seen.sort();
        assert_eq!(seen, vec![vec![0, 1], vec![1, -1], vec![1, 0], vec![1, 1]]);
    }
}
