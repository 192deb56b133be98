//! Derived statistics of a minimal point chain: per-index logarithmic
//! quotients
//!
//!   sigma_k = log err_{k+1} / log err_k
//!   tau_k   = log ||z_{k+1}|| / log ||z_k||
//!   nu_k    = -log err_k / log ||z_k||
//!   what_k  = -log err_k / log ||z_{k+1}||
//!
//! together with their window extrema, finite-horizon estimates of the
//! ordinary and uniform approximation exponents, the positive root G_{a,b}
//! of the associated exponent polynomial, and an audit of the exponent
//! inequalities the chain is expected to satisfy.
//!
//! All quantities are certified interval enclosures computed from the
//! stored error enclosures.  Limits superior and inferior are replaced by
//! maxima and minima over a reported index window; nothing extrapolates
//! beyond the data.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::interval::{ln_interval, ln_rat, Interval, Rat};
use crate::minimal::MinimalPoint;

/// Where the numbers in an [`ApproximationStats`] came from.  Audits that
/// are only meaningful on real chains refuse `Synthetic` inputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Computed from a chain; the fingerprint hashes the window data.
    Computed { fingerprint: u64 },
    /// Assembled by hand, e.g. from known limit values.
    Synthetic,
}

/// Window request for [`compute_stats`].
#[derive(Clone, Debug)]
pub struct StatsRequest {
    /// First chain index of the window (1-based, inclusive).
    pub k0: usize,
    /// Last chain index of the window (inclusive).
    pub k_max: usize,
    /// Working precision for the logarithm enclosures.
    pub bits: u32,
    /// Certified upper bound on the largest |theta entry|; enables the
    /// per-index pigeonhole floor check.
    pub theta_sup: Option<Rat>,
}

impl StatsRequest {
    pub fn window(k0: usize, k_max: usize) -> Self {
        StatsRequest {
            k0,
            k_max,
            bits: 128,
            theta_sup: None,
        }
    }
}

/// Certified exponent statistics over a window of chain indices.
#[derive(Clone, Debug)]
pub struct ApproximationStats {
    pub m: usize,
    pub n: usize,
    pub k0: usize,
    pub k_max: usize,
    /// nu_k for k in [k0, k_max].
    pub nu: Vec<(usize, Interval)>,
    /// tau_k for k in [k0, k_max - 1].
    pub tau: Vec<(usize, Interval)>,
    /// sigma_k for k in [k0, k_max - 1].
    pub sigma: Vec<(usize, Interval)>,
    /// what_k for k in [k0, k_max - 1].
    pub what: Vec<(usize, Interval)>,
    pub sigma_lower: Interval,
    pub sigma_upper: Interval,
    pub tau_lower: Interval,
    pub tau_upper: Interval,
    pub nu_lower: Interval,
    pub nu_upper: Interval,
    /// Finite-horizon estimate of the ordinary exponent: max nu_k.
    pub w_est: Interval,
    /// Finite-horizon estimate of the uniform exponent: min what_k.
    pub what_lower: Interval,
    /// Largest log ||z_{k+m+n}|| / log ||z_k|| over the window, when the
    /// window is deep enough to span m+n+1 points.
    pub tau_star: Option<Interval>,
    /// min over k of what_k minus its pigeonhole floor; certified
    /// nonnegative when present.
    pub pigeonhole_margin: Option<Interval>,
    pub provenance: Provenance,
}

fn fnv1a(bytes: &[u8], state: &mut u64) {
    for &b in bytes {
        *state ^= u64::from(b);
        *state = state.wrapping_mul(0x100_0000_01b3);
    }
}

fn fingerprint(points: &[&MinimalPoint], m: usize, n: usize) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    fnv1a(&(m as u64).to_le_bytes(), &mut h);
    fnv1a(&(n as u64).to_le_bytes(), &mut h);
    for p in points {
        fnv1a(&(p.k as u64).to_le_bytes(), &mut h);
        fnv1a(p.norm.to_string().as_bytes(), &mut h);
        fnv1a(p.err.lo.numer().to_string().as_bytes(), &mut h);
        fnv1a(p.err.lo.denom().to_string().as_bytes(), &mut h);
        fnv1a(p.err.hi.numer().to_string().as_bytes(), &mut h);
        fnv1a(p.err.hi.denom().to_string().as_bytes(), &mut h);
    }
    h
}

/// Elementwise window minimum: the true minimum of values drawn from these
/// enclosures lies in [min lo, min hi].
fn window_min(items: &[(usize, Interval)]) -> Interval {
    let lo = items.iter().map(|(_, v)| v.lo.clone()).min().expect("nonempty");
    let hi = items.iter().map(|(_, v)| v.hi.clone()).min().expect("nonempty");
    Interval::new(lo, hi)
}

fn window_max(items: &[(usize, Interval)]) -> Interval {
    let lo = items.iter().map(|(_, v)| v.lo.clone()).max().expect("nonempty");
    let hi = items.iter().map(|(_, v)| v.hi.clone()).max().expect("nonempty");
    Interval::new(lo, hi)
}

/// Compute the per-index quantities and window extrema for chain indices
/// [k0, k_max].  Requires the window points to exist, norms >= 2, and all
/// error enclosures strictly inside (0, 1).
pub fn compute_stats(
    seq: &[MinimalPoint],
    m: usize,
    n: usize,
    req: &StatsRequest,
) -> Result<ApproximationStats> {
    let (k0, kk) = (req.k0, req.k_max);
    if k0 < 1 || kk < k0 + 2 {
        return Err(Error::DegenerateWindow(format!(
            "window [{k0}, {kk}] needs at least three indices"
        )));
    }
    let mut pts: Vec<&MinimalPoint> = Vec::new();
    for k in k0..=kk {
        let p = seq
            .iter()
            .find(|p| p.k == k)
            .ok_or_else(|| Error::DegenerateWindow(format!("chain has no index {k}")))?;
        if p.z.len() != m + n {
            return Err(Error::ShapeMismatch(format!(
                "point has {} coordinates, system has {}",
                p.z.len(),
                m + n
            )));
        }
        if p.norm < BigInt::from(2) {
            return Err(Error::DegenerateWindow(format!(
                "norm {} at index {k} leaves log ratios undefined",
                p.norm
            )));
        }
        if !p.err.is_positive() || p.err.hi >= Rat::one() {
            return Err(Error::DegenerateWindow(format!(
                "error enclosure at index {k} not strictly inside (0, 1)"
            )));
        }
        pts.push(p);
    }
    let bits = req.bits;

    // Logs of norms (positive) and errors (negative), indexed by window slot.
    let mut log_norm = Vec::with_capacity(pts.len());
    let mut log_err = Vec::with_capacity(pts.len());
    for p in &pts {
        let ln_n = ln_rat(&Rat::from_integer(p.norm.clone()), bits)?;
        if !ln_n.is_positive() {
            return Err(Error::Internal("log of norm >= 2 not positive".into()));
        }
        let ln_e = ln_interval(&p.err, bits)?;
        if !ln_e.is_negative() {
            return Err(Error::Internal("log of error in (0,1) not negative".into()));
        }
        log_norm.push(ln_n);
        log_err.push(ln_e);
    }

    let mut nu = Vec::new();
    let mut tau = Vec::new();
    let mut sigma = Vec::new();
    let mut what = Vec::new();
    for (i, p) in pts.iter().enumerate() {
        nu.push((p.k, log_err[i].neg().div(&log_norm[i])?));
        if i + 1 < pts.len() {
            tau.push((p.k, log_norm[i + 1].div(&log_norm[i])?));
            sigma.push((p.k, log_err[i + 1].div(&log_err[i])?));
            what.push((p.k, log_err[i].neg().div(&log_norm[i + 1])?));
        }
    }

    // Per-index certified sanity: the strict chain ordering forces
    // sigma_k > 1, tau_k > 1, what_k <= nu_k, and the product identity
    // sigma_k = tau_k nu_{k+1} / nu_k must hold up to enclosure overlap.
    let one = Rat::one();
    for i in 0..tau.len() {
        if sigma[i].1.hi <= one || tau[i].1.hi <= one {
            return Err(Error::Internal(format!(
                "growth quotient at index {} certifiably at most 1",
                tau[i].0
            )));
        }
        if what[i].1.lo > nu[i].1.hi {
            return Err(Error::Internal(format!(
                "uniform quotient exceeds nu at index {}",
                what[i].0
            )));
        }
        let prod = tau[i].1.mul(&nu[i + 1].1);
        if prod.hi <= nu[i].1.lo {
            return Err(Error::Internal(format!(
                "tau_k nu_(k+1) certifiably at most nu_k at index {}",
                tau[i].0
            )));
        }
        let rhs = prod.div(&nu[i].1)?;
        if !sigma[i].1.overlaps(&rhs) {
            return Err(Error::Internal(format!(
                "product identity enclosures disjoint at index {}",
                tau[i].0
            )));
        }
    }

    // Pigeonhole floor: a box argument with exact constant shows
    // err_k <= X^(-n/m) for X = floor((||z_{k+1}|| - 1) / ceil(1 + n*sup)),
    // hence what_k >= (n/m) log X / log ||z_{k+1}||.
    let pigeonhole_margin = if let Some(sup) = &req.theta_sup {
        let c_rat = Rat::one() + Rat::from_integer(BigInt::from(n)) * sup;
        let c = c_rat.ceil().to_integer().max(BigInt::one());
        let nm = Rat::new(BigInt::from(n), BigInt::from(m));
        let mut margin: Option<Interval> = None;
        for i in 0..what.len() {
            let h = &pts[i + 1].norm - BigInt::one();
            let x = h / &c;
            let item = if x >= BigInt::from(2) {
                let floor = ln_rat(&Rat::from_integer(x), bits)?
                    .scale(&nm)
                    .div(&log_norm[i + 1])?;
                what[i].1.sub(&floor)
            } else {
                what[i].1.clone()
            };
            margin = Some(match margin {
                None => item,
                Some(m0) => m0.min(&item),
            });
        }
        if let Some(mg) = &margin {
            if mg.hi < Rat::zero() {
                return Err(Error::Internal(
                    "pigeonhole floor certifiably violated".into(),
                ));
            }
        }
        margin
    } else {
        None
    };

    // Largest log-norm ratio across a span of m+n steps.
    let span = m + n;
    let mut tau_star: Option<Interval> = None;
    for i in 0..pts.len() {
        if i + span >= pts.len() {
            break;
        }
        let r = log_norm[i + span].div(&log_norm[i])?;
        tau_star = Some(match tau_star {
            None => r,
            Some(t) => t.max(&r),
        });
    }

    let fp = fingerprint(&pts, m, n);
    Ok(ApproximationStats {
        m,
        n,
        k0,
        k_max: kk,
        sigma_lower: window_min(&sigma),
        sigma_upper: window_max(&sigma),
        tau_lower: window_min(&tau),
        tau_upper: window_max(&tau),
        nu_lower: window_min(&nu),
        nu_upper: window_max(&nu),
        w_est: window_max(&nu),
        what_lower: window_min(&what),
        nu,
        tau,
        sigma,
        what,
        tau_star,
        pigeonhole_margin,
        provenance: Provenance::Computed { fingerprint: fp },
    })
}

impl ApproximationStats {
    /// Assemble stats from given window aggregates, e.g. known limit
    /// values.  Per-index arrays stay empty and the provenance is marked
    /// so chain-only audits can refuse the input.
    #[allow(clippy::too_many_arguments)]
    pub fn synthetic(
        m: usize,
        n: usize,
        sigma_lower: Interval,
        sigma_upper: Interval,
        tau_lower: Interval,
        tau_upper: Interval,
        w_est: Interval,
        what_lower: Interval,
    ) -> Self {
        ApproximationStats {
            m,
            n,
            k0: 0,
            k_max: 0,
            nu: Vec::new(),
            tau: Vec::new(),
            sigma: Vec::new(),
            what: Vec::new(),
            nu_lower: w_est.clone(),
            nu_upper: w_est.clone(),
            sigma_lower,
            sigma_upper,
            tau_lower,
            tau_upper,
            w_est,
            what_lower,
            tau_star: None,
            pigeonhole_margin: None,
            provenance: Provenance::Synthetic,
        }
    }

    pub fn window_depth(&self) -> usize {
        self.k_max.saturating_sub(self.k0)
    }

    pub fn nu_at(&self, k: usize) -> Option<&Interval> {
        self.nu.iter().find(|(i, _)| *i == k).map(|(_, v)| v)
    }

    pub fn tau_at(&self, k: usize) -> Option<&Interval> {
        self.tau.iter().find(|(i, _)| *i == k).map(|(_, v)| v)
    }

    pub fn sigma_at(&self, k: usize) -> Option<&Interval> {
        self.sigma.iter().find(|(i, _)| *i == k).map(|(_, v)| v)
    }

    pub fn what_at(&self, k: usize) -> Option<&Interval> {
        self.what.iter().find(|(i, _)| *i == k).map(|(_, v)| v)
    }

    /// The unconditional pigeonhole value n/m, always a certified lower
    /// bound for the uniform exponent.
    pub fn dim_ratio(&self) -> Interval {
        Interval::point(Rat::new(BigInt::from(self.n), BigInt::from(self.m)))
    }

    /// Lower surrogate for the uniform exponent to feed the independence
    /// criteria: either the window minimum of what_k or, on request, the
    /// dimension ratio n/m.
    pub fn uniform_surrogate(&self, use_dim_ratio: bool) -> Interval {
        if use_dim_ratio {
            self.dim_ratio()
        } else {
            self.what_lower.clone()
        }
    }
}

/// Recompute the window fingerprint directly from a chain, for callers
/// that must verify an [`ApproximationStats`] belongs to the sequence at
/// hand.
pub fn window_fingerprint(
    seq: &[MinimalPoint],
    m: usize,
    n: usize,
    k0: usize,
    k_max: usize,
) -> Result<u64> {
    let mut pts = Vec::new();
    for k in k0..=k_max {
        let p = seq
            .iter()
            .find(|p| p.k == k)
            .ok_or_else(|| Error::DegenerateWindow(format!("chain has no index {k}")))?;
        pts.push(p);
    }
    Ok(fingerprint(&pts, m, n))
}

// ---------------------------------------------------------------------------
// Positive root of the exponent polynomial.

/// Exact evaluation of x^(a-1) * P_{a,b}(x) at a rational point:
/// Q(x) = sum_{j=a-1}^{a+b-2} x^j - w * sum_{j=0}^{a-1} x^j, except the
/// x^(a-1) coefficient combines to (1 - w).
fn q_eval(a: u32, b: u32, w: &Rat, x: &Rat) -> Rat {
    let mut pos = Rat::zero();
    let mut xp = Rat::one();
    let mut neg = Rat::zero();
    for j in 0..=(a + b - 2) {
        if j >= a - 1 {
            pos += &xp;
        }
        if j <= a - 1 {
            neg += &xp;
        }
        xp *= x;
    }
    pos - w * neg
}

/// Root enclosure for one exact coefficient value, via sign bisection.
fn positive_root_exact(a: u32, b: u32, w: &Rat) -> Result<Interval> {
    // The rescaled polynomial has coefficients +1 above degree a-1, then
    // 1-w, then -w below; there is exactly one sign change (hence exactly
    // one positive root) iff a >= 2 and w > 0, or a = 1 and w > 1.
    let has_root = (a >= 2 && w > &Rat::zero()) || (a == 1 && w > &Rat::one());
    if !has_root {
        return Err(Error::NoPositiveRoot { a, b });
    }
    let at_one = Rat::from_integer(BigInt::from(b)) - Rat::from_integer(BigInt::from(a)) * w;
    if at_one.is_zero() {
        return Ok(Interval::point(Rat::one()));
    }
    let (mut lo, mut hi);
    if at_one.is_negative() {
        // Root above 1: double until the sign flips.
        lo = Rat::one();
        hi = Rat::from_integer(BigInt::from(2));
        loop {
            let q = q_eval(a, b, w, &hi);
            if q.is_zero() {
                return Ok(Interval::point(hi));
            }
            if q.is_positive() {
                break;
            }
            lo = hi.clone();
            hi *= Rat::from_integer(BigInt::from(2));
        }
    } else {
        // Root below 1: halve until the sign flips.
        hi = Rat::one();
        lo = Rat::new(BigInt::one(), BigInt::from(2));
        loop {
            let q = q_eval(a, b, w, &lo);
            if q.is_zero() {
                return Ok(Interval::point(lo));
            }
            if q.is_negative() {
                break;
            }
            hi = lo.clone();
            lo /= Rat::from_integer(BigInt::from(2));
        }
    }
    // Invariant: Q(lo) < 0 < Q(hi).  Bisect to relative width 2^-64.
    let tol = crate::interval::pow2(-64);
    let two = Rat::from_integer(BigInt::from(2));
    while &hi - &lo > &lo * &tol {
        let mid = (&lo + &hi) / &two;
        let q = q_eval(a, b, w, &mid);
        if q.is_zero() {
            return Ok(Interval::point(mid));
        }
        if q.is_negative() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Interval::new(lo, hi))
}

/// Enclosure of the unique positive root G_{a,b} of
/// -sum_{j=1}^{a-1} w/x^j + 1 - w + sum_{j=1}^{b-1} x^j, as a function of
/// the uniform-exponent value `what`.  The root is strictly increasing in
/// the coefficient, so endpoint roots bracket it.  Returns exactly 1 when
/// the coefficient is exactly b/a.
pub fn compute_g(a: u32, b: u32, what: &Interval) -> Result<Interval> {
    if a < 1 || b < 2 {
        return Err(Error::InvalidSpec(format!(
            "root polynomial needs a >= 1, b >= 2, got a={a}, b={b}"
        )));
    }
    let lo_root = positive_root_exact(a, b, &what.lo)?;
    if what.width().is_zero() {
        return Ok(lo_root);
    }
    let hi_root = positive_root_exact(a, b, &what.hi)?;
    Ok(lo_root.hull(&hi_root))
}

// ---------------------------------------------------------------------------
// Inequality audit.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Satisfied,
    ViolatedAtFiniteHorizon,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Satisfied => "SATISFIED",
            Verdict::ViolatedAtFiniteHorizon => "VIOLATED-AT-FINITE-HORIZON",
            Verdict::Inconclusive => "INCONCLUSIVE",
        };
        f.write_str(s)
    }
}

/// One audited inequality, normalized to the claim lhs <= rhs.
#[derive(Clone, Debug)]
pub struct AuditLine {
    pub name: String,
    pub lhs: Interval,
    pub rhs: Interval,
    pub verdict: Verdict,
    pub note: String,
}

#[derive(Clone, Debug)]
pub struct AuditReport {
    pub m: usize,
    pub n: usize,
    pub k0: usize,
    pub k_max: usize,
    pub lines: Vec<AuditLine>,
}

pub(crate) fn judge(lhs: &Interval, rhs: &Interval) -> Verdict {
    if lhs.hi <= rhs.lo {
        Verdict::Satisfied
    } else if lhs.lo > rhs.hi {
        Verdict::ViolatedAtFiniteHorizon
    } else {
        Verdict::Inconclusive
    }
}

fn line(name: &str, lhs: Interval, rhs: Interval, note: &str) -> AuditLine {
    let verdict = judge(&lhs, &rhs);
    AuditLine {
        name: name.into(),
        lhs,
        rhs,
        verdict,
        note: note.into(),
    }
}

fn inconclusive_line(name: &str, note: &str) -> AuditLine {
    AuditLine {
        name: name.into(),
        lhs: Interval::zero(),
        rhs: Interval::zero(),
        verdict: Verdict::Inconclusive,
        note: note.into(),
    }
}

/// 1 + t + t^2 + ... + t^(terms-1) as an interval.
fn geometric_sum(t: &Interval, terms: usize) -> Interval {
    let mut acc = Interval::zero();
    for j in 0..terms {
        acc = acc.add(&t.pow_u32(j as u32));
    }
    acc
}

/// Audit the exponent inequalities against finite-horizon surrogates:
/// the ordinary exponent becomes max nu_k, the uniform exponent min
/// what_k, and every limit superior/inferior its window counterpart.
/// Verdicts are certified three-way comparisons; a violation only ever
/// means the finite window contradicts the asymptotic claim, so it is
/// reported as such and never as a refutation.
pub fn audit_inequalities(stats: &ApproximationStats, min_depth: usize) -> AuditReport {
    let m = stats.m;
    let n = stats.n;
    let h = m + n;
    let w = &stats.w_est;
    let what = &stats.what_lower;
    let tau_up = &stats.tau_upper;
    let tau_lo = &stats.tau_lower;
    let sig_up = &stats.sigma_upper;
    let sig_lo = &stats.sigma_lower;
    let one = Interval::from_int(1);
    let mut lines = Vec::new();

    lines.push(line(
        "ordinary_at_least_uniform",
        what.clone(),
        w.clone(),
        "window estimate of the uniform exponent against the ordinary one",
    ));
    lines.push(line(
        "uniform_at_least_dim_ratio",
        Interval::point(Rat::new(BigInt::from(n), BigInt::from(m))),
        what.clone(),
        "pigeonhole lower bound n/m for the uniform exponent",
    ));
    lines.push(line(
        "growth_rates_at_least_one",
        one.clone(),
        sig_lo.max(tau_lo),
        "window minima of the growth quotients stay at least 1",
    ));
    match w.div(what) {
        Ok(ratio) => {
            lines.push(line(
                "growth_capped_by_exponent_ratio",
                sig_up.max(tau_up),
                ratio,
                "window maxima of the growth quotients against w/what",
            ));
        }
        Err(_) => lines.push(inconclusive_line(
            "growth_capped_by_exponent_ratio",
            "uniform estimate not separated from zero",
        )),
    }
    lines.push(line(
        "uniform_capped_by_norm_growth_sum",
        what.clone(),
        geometric_sum(tau_up, h - 1),
        "assumes short vectors in spans of m+n consecutive points",
    ));
    if h >= 3 {
        lines.push(line(
            "uniform_capped_by_mixed_growth_sum",
            what.clone(),
            one.add(&tau_lo.mul(&geometric_sum(tau_up, h - 2))),
            "assumes short vectors in all late spans of m+n consecutive points",
        ));
    }
    lines.push(line(
        "uniform_capped_for_short_pairs",
        what.clone(),
        one.clone(),
        "assumes short vectors in consecutive pairs; unconditional for n = 1",
    ));
    {
        // f(t) = t^2 - t is increasing for t >= 1/2, giving a tight image.
        let half = Rat::new(BigInt::one(), BigInt::from(2));
        let gap = if what.lo >= half {
            let f = |t: &Rat| t * t - t;
            Interval::new(f(&what.lo), f(&what.hi))
        } else {
            what.square().sub(what)
        };
        lines.push(line(
            "ordinary_at_least_uniform_squared_gap",
            gap,
            w.clone(),
            "assumes short vectors in consecutive triples; unconditional for one form in two variables",
        ));
    }
    lines.push(line(
        "uniform_capped_by_growth_plus_one",
        what.clone(),
        tau_up.add(&one),
        "assumes short vectors in consecutive triples",
    ));
    {
        // (tau_up^h - 1 - (tau_up - 1)(1 - 1/tau_lo)) / ((tau_up - 1)(sigma_lo - 1)).
        let name = "uniform_capped_by_dependence_window";
        let tu1 = tau_up.sub(&one);
        let sl1 = sig_lo.sub(&one);
        let denom = tu1.mul(&sl1);
        let inner = one.sub(&one.div(tau_lo).unwrap_or_else(|_| one.clone()));
        let numer = tau_up
            .pow_u32(h as u32)
            .sub(&one)
            .sub(&tu1.mul(&inner));
        match numer.div(&denom) {
            Ok(rhs) => lines.push(line(
                name,
                what.clone(),
                rhs,
                "unconditional cap from forced dependence of m+n+1 consecutive points",
            )),
            Err(_) => lines.push(inconclusive_line(
                name,
                "growth quotients not separated from 1",
            )),
        }
    }
    {
        let name = "uniform_capped_by_window_product";
        match &stats.tau_star {
            Some(ts) => {
                let denom = sig_lo.sub(&one);
                match ts.scale(&Rat::from_integer(BigInt::from(h))).div(&denom) {
                    Ok(rhs) => lines.push(line(
                        name,
                        what.clone(),
                        rhs,
                        "unconditional cap from the norm growth across one dependence window",
                    )),
                    Err(_) => lines.push(inconclusive_line(
                        name,
                        "error growth quotient not separated from 1",
                    )),
                }
            }
            None => lines.push(inconclusive_line(
                name,
                "window too shallow to span m+n+1 points",
            )),
        }
    }
    {
        let name = "exponent_ratio_at_least_root";
        let attempt = compute_g(m as u32, n.max(2) as u32, what)
            .and_then(|g| w.div(what).map(|r| (g, r)));
        match (n >= 2, attempt) {
            (true, Ok((g, ratio))) => lines.push(line(
                name,
                g,
                ratio,
                "assumes independent spans of full dimension; root of the exponent polynomial",
            )),
            (false, _) => lines.push(inconclusive_line(
                name,
                "root polynomial needs at least two variables",
            )),
            (_, Err(_)) => lines.push(inconclusive_line(
                name,
                "root or ratio not computable from the window estimates",
            )),
        }
    }
    if let Some(margin) = &stats.pigeonhole_margin {
        lines.push(line(
            "per_index_pigeonhole_floor",
            Interval::zero(),
            margin.clone(),
            "each what_k clears its exact box-argument floor",
        ));
    }

    if stats.window_depth() < min_depth {
        for l in &mut lines {
            l.verdict = Verdict::Inconclusive;
            l.note = format!(
                "{} [window depth {} below requested minimum {min_depth}]",
                l.note,
                stats.window_depth()
            );
        }
    }

    AuditReport {
        m,
        n,
        k0: stats.k0,
        k_max: stats.k_max,
        lines,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::sqrt_enclosure;
    use crate::minimal::{minimal_point_sequence, EngineConfig, SequenceRequest, ThetaMatrix};
    use crate::realspec::RealSpec;

    fn golden_chain(count: usize) -> Vec<MinimalPoint> {
        let phi = RealSpec::parse("surd:(1+1*sqrt(5))/2").unwrap();
        let theta = ThetaMatrix::single(phi);
        minimal_point_sequence(
            &theta,
            &SequenceRequest::with_count(count),
            &EngineConfig::default(),
        )
        .unwrap()
        .points
    }

    #[test]
    fn root_is_one_at_critical_coefficient() {
        for n in 2..=5u32 {
            let g = compute_g(1, n, &Interval::from_int(n as i64)).unwrap();
            assert_eq!(g, Interval::from_int(1));
        }
        let g = compute_g(2, 3, &Interval::point(Rat::new(3.into(), 2.into()))).unwrap();
        assert_eq!(g, Interval::from_int(1));
        let g = compute_g(3, 4, &Interval::point(Rat::new(4.into(), 3.into()))).unwrap();
        assert_eq!(g, Interval::from_int(1));
    }

    #[test]
    fn root_matches_golden_ratio_case() {
        // With a = 1, b = 2 the polynomial is 1 - w + x, so the root at
        // w = phi^2 is phi^2 - 1 = phi.
        let s5 = sqrt_enclosure(&Rat::from_integer(5.into()), 128).unwrap();
        let half = Rat::new(1.into(), 2.into());
        let phi = s5.add(&Interval::from_int(1)).scale(&half);
        let phi2 = s5.add(&Interval::from_int(3)).scale(&half);
        let g = compute_g(1, 2, &phi2).unwrap();
        assert!(g.overlaps(&phi), "{g:?} vs {phi:?}");
        assert!(g.width() < Rat::new(1.into(), 1_000_000.into()));
    }

    #[test]
    fn root_rejects_flat_polynomial() {
        // a = 1 and w <= 1: every coefficient is nonnegative, no positive root.
        let err = compute_g(1, 2, &Interval::point(Rat::new(1.into(), 2.into()))).unwrap_err();
        assert!(matches!(err, Error::NoPositiveRoot { a: 1, b: 2 }));
    }

    #[test]
    fn root_exact_integer_hit() {
        // w = 3, a = 1, b = 2: root x = 2 hit exactly by the doubling probe.
        let g = compute_g(1, 2, &Interval::from_int(3)).unwrap();
        assert_eq!(g, Interval::from_int(2));
    }

    #[test]
    fn golden_ratio_window_quantities() {
        let pts = golden_chain(10);
        let mut req = StatsRequest::window(2, 9);
        req.theta_sup = Some(Rat::new(17.into(), 10.into()));
        let stats = compute_stats(&pts, 1, 1, &req).unwrap();
        assert_eq!(stats.nu.len(), 8);
        assert_eq!(stats.tau.len(), 7);
        // nu_k = k log phi / log F_{k+1} decreases from ~1.39 towards 1.
        let up = stats.nu_upper.mid_f64();
        let lo = stats.nu_lower.mid_f64();
        assert!((1.30..1.45).contains(&up), "nu_upper mid {up}");
        assert!((1.05..1.15).contains(&lo), "nu_lower mid {lo}");
        assert!(stats.tau_lower.lo > Rat::one());
        assert!(stats.sigma_lower.lo > Rat::one());
        let margin = stats.pigeonhole_margin.as_ref().unwrap();
        assert!(margin.hi >= Rat::zero());
        assert!(matches!(stats.provenance, Provenance::Computed { .. }));
    }

    #[test]
    fn shallow_window_rejected() {
        let pts = golden_chain(4);
        let err = compute_stats(&pts, 1, 1, &StatsRequest::window(2, 3)).unwrap_err();
        assert!(matches!(err, Error::DegenerateWindow(_)));
        // Window reaching past the chain end.
        let err = compute_stats(&pts, 1, 1, &StatsRequest::window(2, 9)).unwrap_err();
        assert!(matches!(err, Error::DegenerateWindow(_)));
        // Window touching the norm-1 first point.
        let err = compute_stats(&pts, 1, 1, &StatsRequest::window(1, 4)).unwrap_err();
        assert!(matches!(err, Error::DegenerateWindow(_)));
    }

    #[test]
    fn golden_ratio_audit_shape() {
        let pts = golden_chain(12);
        let mut req = StatsRequest::window(2, 11);
        req.theta_sup = Some(Rat::new(17.into(), 10.into()));
        let stats = compute_stats(&pts, 1, 1, &req).unwrap();
        let report = audit_inequalities(&stats, 4);
        let get = |name: &str| {
            report
                .lines
                .iter()
                .find(|l| l.name == name)
                .unwrap_or_else(|| panic!("missing line {name}"))
        };
        // what_k < nu_k holds index-wise, so the estimates satisfy this one.
        assert_eq!(get("ordinary_at_least_uniform").verdict, Verdict::Satisfied);
        // Finite-horizon min what_k sits below the limit value 1.
        assert_eq!(
            get("uniform_at_least_dim_ratio").verdict,
            Verdict::ViolatedAtFiniteHorizon
        );
        assert_eq!(get("growth_rates_at_least_one").verdict, Verdict::Satisfied);
        // For m = n = 1 the dependence-window cap is finite and comfortably
        // above the uniform estimate.
        assert_eq!(
            get("uniform_capped_by_dependence_window").verdict,
            Verdict::Satisfied
        );
        assert_eq!(
            get("per_index_pigeonhole_floor").verdict,
            Verdict::Satisfied
        );
    }

    #[test]
    fn shallow_depth_forces_inconclusive() {
        let pts = golden_chain(6);
        let stats = compute_stats(&pts, 1, 1, &StatsRequest::window(2, 5)).unwrap();
        let report = audit_inequalities(&stats, 8);
        assert!(report
            .lines
            .iter()
            .all(|l| l.verdict == Verdict::Inconclusive));
    }

    #[test]
    fn synthetic_limit_values_near_equality() {
        // Known limit data: all growth quotients equal the golden ratio,
        // uniform exponent phi^2, ordinary exponent phi^3; the squared-gap
        // cap is then an exact equality, so enclosures stay inconclusive.
        let s5 = sqrt_enclosure(&Rat::from_integer(5.into()), 192).unwrap();
        let half = Rat::new(1.into(), 2.into());
        let phi = s5.add(&Interval::from_int(1)).scale(&half);
        let phi2 = phi.mul(&phi);
        let phi3 = phi2.mul(&phi);
        let stats = ApproximationStats::synthetic(
            1,
            2,
            phi.clone(),
            phi.clone(),
            phi.clone(),
            phi.clone(),
            phi3,
            phi2,
        );
        assert_eq!(stats.provenance, Provenance::Synthetic);
        let report = audit_inequalities(&stats, 0);
        let gap = report
            .lines
            .iter()
            .find(|l| l.name == "ordinary_at_least_uniform_squared_gap")
            .unwrap();
        assert_eq!(gap.verdict, Verdict::Inconclusive);
        assert!(gap.lhs.overlaps(&gap.rhs));
        let ratio = report
            .lines
            .iter()
            .find(|l| l.name == "exponent_ratio_at_least_root")
            .unwrap();
        // w/what = phi and G_{1,2}(phi^2) = phi: equality again.
        assert!(ratio.lhs.overlaps(&ratio.rhs));
    }

    #[test]
    fn pigeonhole_margin_requires_theta_bound() {
        let pts = golden_chain(8);
        let stats = compute_stats(&pts, 1, 1, &StatsRequest::window(2, 7)).unwrap();
        assert!(stats.pigeonhole_margin.is_none());
        let report = audit_inequalities(&stats, 2);
        assert!(!report
            .lines
            .iter()
            .any(|l| l.name == "per_index_pigeonhole_floor"));
    }
}
