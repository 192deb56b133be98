//! Linear-independence criteria over a chain window.
//!
//! Each criterion compares a lower surrogate for the uniform exponent
//! against a threshold assembled from the window statistics and returns a
//! certified three-way answer: fired, not fired, or inconclusive when the
//! enclosures overlap the threshold.  A fired criterion predicts that some
//! run of consecutive minimal points is linearly independent; the
//! soundness audit recomputes the exact integer rank of every implicated
//! run and reports any fired-but-dependent instance as an incident.
//!
//! The surrogate contract: pass a lower bound for the uniform exponent
//! (the window minimum of what_k as a finite-horizon proxy, or the
//! unconditional pigeonhole value n/m).  Thresholds decrease as the
//! surrogate grows, so firing is monotone in it.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::interval::{ln_interval, ln_rat, Interval, Rat};
use crate::intmat::{canonical_sign, dot, inf_norm, IntMat};
use crate::lll::lll_reduce;
use crate::minimal::MinimalPoint;
use crate::siegel::kernel_vectors_within;
use crate::stats::{self, ApproximationStats, AuditLine, Provenance};

const LOG_BITS: u32 = 160;
const NODE_LIMIT: u64 = 1_000_000;

/// Identifying tag of a criterion, the vocabulary the reports and the
/// command line speak.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CriterionId {
    Spez,
    Starkaug,
    Konk,
    Rr,
    FehlSusdortn,
    FehlSushier,
    Nr1,
    Nr3,
    Nr2,
    Cc,
    Quad36,
    Ratio36,
    Konse,
}

impl CriterionId {
    pub fn as_str(self) -> &'static str {
        match self {
            CriterionId::Spez => "spez",
            CriterionId::Starkaug => "starkaug",
            CriterionId::Konk => "konk",
            CriterionId::Rr => "rr",
            CriterionId::FehlSusdortn => "fehl_susdortn",
            CriterionId::FehlSushier => "fehl_sushier",
            CriterionId::Nr1 => "nr1",
            CriterionId::Nr3 => "nr3",
            CriterionId::Nr2 => "nr2",
            CriterionId::Cc => "cc",
            CriterionId::Quad36 => "36_quad",
            CriterionId::Ratio36 => "36_ratio",
            CriterionId::Konse => "konse",
        }
    }
}

impl std::fmt::Display for CriterionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fired {
    Yes,
    No,
    Inconclusive,
}

impl std::fmt::Display for Fired {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Fired::Yes => "yes",
            Fired::No => "no",
            Fired::Inconclusive => "inconclusive",
        })
    }
}

/// Outcome of one criterion at one window position.
#[derive(Clone, Debug)]
pub struct CriterionVerdict {
    pub id: CriterionId,
    /// First chain index the hypotheses read from.
    pub k: usize,
    /// Number of consecutive points the conclusion claims independent.
    pub ell: usize,
    /// Named quantities entering the comparison.
    pub hypothesis: Vec<(String, Interval)>,
    pub fired: Fired,
    /// Exact rank of the implicated points, once audited.
    pub ground_truth: Option<usize>,
    /// Fired implies full rank; set by the audit.
    pub sound: Option<bool>,
    pub note: String,
}

impl CriterionVerdict {
    pub(crate) fn new(id: CriterionId, k: usize, ell: usize, fired: Fired) -> Self {
        CriterionVerdict {
            id,
            k,
            ell,
            hypothesis: Vec::new(),
            fired,
            ground_truth: None,
            sound: None,
            note: String::new(),
        }
    }

    pub(crate) fn with(mut self, name: &str, v: Interval) -> Self {
        self.hypothesis.push((name.into(), v));
        self
    }

    pub(crate) fn noted(mut self, note: &str) -> Self {
        self.note = note.into();
        self
    }

    pub fn hypothesis_value(&self, name: &str) -> Option<&Interval> {
        self.hypothesis
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v)
    }

    /// Record the audited rank of the implicated points.
    pub fn record_rank(&mut self, rank: usize) {
        self.ground_truth = Some(rank);
        self.sound = Some(self.fired != Fired::Yes || rank == self.ell);
    }
}

/// Certified decision of a strict hypothesis lhs > rhs.
pub(crate) fn fired_when_above(lhs: &Interval, rhs: &Interval) -> Fired {
    if lhs.lo > rhs.hi {
        Fired::Yes
    } else if lhs.hi <= rhs.lo {
        Fired::No
    } else {
        Fired::Inconclusive
    }
}

/// Certified decision of a strict hypothesis lhs < rhs.
fn fired_when_below(lhs: &Interval, rhs: &Interval) -> Fired {
    if lhs.hi < rhs.lo {
        Fired::Yes
    } else if lhs.lo >= rhs.hi {
        Fired::No
    } else {
        Fired::Inconclusive
    }
}

/// Certified decision of an integer hypothesis ell < rhs.
pub(crate) fn fired_when_index_below(ell: usize, rhs: &Interval) -> Fired {
    let l = Rat::from_integer(BigInt::from(ell));
    if l < rhs.lo {
        Fired::Yes
    } else if l >= rhs.hi {
        Fired::No
    } else {
        Fired::Inconclusive
    }
}

pub(crate) fn contradicts(a: Fired, b: Fired) -> bool {
    matches!((a, b), (Fired::Yes, Fired::No) | (Fired::No, Fired::Yes))
}

fn require_positive_eps(eps: &Rat) -> Result<()> {
    if eps.is_positive() {
        Ok(())
    } else {
        Err(Error::InvalidSpec("epsilon must be positive".into()))
    }
}

// ---------------------------------------------------------------------------
// Ground truth.

/// Exact linear independence: the stacked integer matrix has full row rank.
pub fn check_independent(points: &[Vec<BigInt>]) -> Result<bool> {
    if points.is_empty() {
        return Err(Error::InvalidSpec("independence needs at least one point".into()));
    }
    let mat = IntMat::from_rows(points.to_vec())?;
    Ok(mat.exact_rank() == points.len())
}

fn window_points(seq: &[MinimalPoint], k: usize, ell: usize) -> Result<Vec<Vec<BigInt>>> {
    let mut rows = Vec::with_capacity(ell);
    for j in k..k + ell {
        let p = seq
            .iter()
            .find(|p| p.k == j)
            .ok_or_else(|| Error::DegenerateWindow(format!("chain has no index {j}")))?;
        rows.push(p.z.clone());
    }
    Ok(rows)
}

fn per_index(
    stats: &ApproximationStats,
    pick: impl Fn(&ApproximationStats, usize) -> Option<&Interval>,
    k: usize,
    what: &str,
) -> Result<Interval> {
    pick(stats, k)
        .cloned()
        .ok_or_else(|| Error::DegenerateWindow(format!("window has no {what} at index {k}")))
}

// ---------------------------------------------------------------------------
// Consecutive-triple criterion from one growth quotient pair.

/// Fires when the surrogate exceeds (tau_{k+1} + 1/tau_k)/(sigma_k - 1) + eps,
/// predicting independence of z_k, z_{k+1}, z_{k+2}.
pub fn criterion_spez(
    stats: &ApproximationStats,
    k: usize,
    what: &Interval,
    eps: &Rat,
) -> Result<CriterionVerdict> {
    require_positive_eps(eps)?;
    let sigma_k = per_index(stats, |s, k| s.sigma_at(k), k, "sigma")?;
    let tau_k = per_index(stats, |s, k| s.tau_at(k), k, "tau")?;
    let tau_next = per_index(stats, |s, k| s.tau_at(k), k + 1, "tau")?;
    let one = Interval::from_int(1);
    let denom = sigma_k.sub(&one);

    let mut v = if tau_k.contains_zero() || denom.contains_zero() {
        CriterionVerdict::new(CriterionId::Spez, k, 3, Fired::Inconclusive)
            .noted("growth quotients not separated from the singular values")
    } else {
        let rhs = tau_next
            .add(&one.div(&tau_k)?)
            .div(&denom)?
            .add(&Interval::point(eps.clone()));
        let fired = fired_when_above(what, &rhs);
        CriterionVerdict::new(CriterionId::Spez, k, 3, fired).with("threshold", rhs)
    };
    v = v
        .with("uniform_lower", what.clone())
        .with("sigma_k", sigma_k)
        .with("tau_k", tau_k)
        .with("tau_next", tau_next);
    Ok(v)
}

// ---------------------------------------------------------------------------
// Window criteria from the aggregate growth quotients.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowVariant {
    /// Sharper length bound, uses the window minimum of the norm growth.
    Strong,
    /// Weaker but simpler bound.
    Simple,
}

/// Length bound for runs of consecutive points: fires when
/// ell < 1 + log(inner)/log(tau_upper) where inner is
/// (tau_up - 1)(what (sigma_lo - 1) + 1 - 1/tau_lo) + 1 for the strong
/// variant and what (tau_up - 1)(sigma_lo - 1) + 1 for the simple one.
/// Firing predicts independence of every ell consecutive points deep in
/// the window.
pub fn criterion_window(
    stats: &ApproximationStats,
    ell: usize,
    variant: WindowVariant,
    what: &Interval,
) -> Result<CriterionVerdict> {
    if ell < 1 {
        return Err(Error::InvalidSpec("run length must be at least 1".into()));
    }
    let id = match variant {
        WindowVariant::Strong => CriterionId::Starkaug,
        WindowVariant::Simple => CriterionId::Konk,
    };
    let one = Interval::from_int(1);
    let sig_lo = &stats.sigma_lower;
    let tau_up = &stats.tau_upper;
    let tau_lo = &stats.tau_lower;
    if sig_lo.lo <= Rat::one() {
        return Err(Error::HypothesisNotCertifiable(
            "window minimum of the error-decay quotient touches 1".into(),
        ));
    }
    if tau_up.lo <= Rat::one() {
        return Err(Error::HypothesisNotCertifiable(
            "window maximum of the norm-growth quotient touches 1".into(),
        ));
    }

    let inner = match variant {
        WindowVariant::Simple => what
            .mul(&tau_up.sub(&one))
            .mul(&sig_lo.sub(&one))
            .add(&one),
        WindowVariant::Strong => {
            if tau_lo.contains_zero() {
                return Err(Error::HypothesisNotCertifiable(
                    "window minimum of the norm-growth quotient not separated from 0".into(),
                ));
            }
            let term = what
                .mul(&sig_lo.sub(&one))
                .add(&one)
                .sub(&one.div(tau_lo)?);
            tau_up.sub(&one).mul(&term).add(&one)
        }
    };
    if !inner.lo.is_positive() {
        let v = CriterionVerdict::new(id, stats.k0, ell, Fired::Inconclusive)
            .noted("length-bound argument not separated from 0")
            .with("uniform_lower", what.clone());
        return Ok(v);
    }
    let rhs = one.add(&ln_interval(&inner, LOG_BITS)?.div(&ln_interval(tau_up, LOG_BITS)?)?);
    let fired = fired_when_index_below(ell, &rhs);
    Ok(CriterionVerdict::new(id, stats.k0, ell, fired)
        .with("uniform_lower", what.clone())
        .with("sigma_window_min", sig_lo.clone())
        .with("tau_window_max", tau_up.clone())
        .with("threshold", rhs))
}

// ---------------------------------------------------------------------------
// Run criteria with explicit per-index hypothesis parameters.

fn rat_pow(r: &Rat, e: usize) -> Rat {
    let mut acc = Rat::one();
    for _ in 0..e {
        acc *= r;
    }
    acc
}

/// The weight sum 1 + 1/tau' + ... + 1/tau'^(ell-2), exact.  Equals
/// ell - 1 at tau' = 1 and never exceeds it for tau' >= 1.
pub fn lambda_sum(tau_p: &Rat, ell: usize) -> Result<Rat> {
    if ell < 2 {
        return Err(Error::InvalidSpec("weight sum needs a run of at least 2".into()));
    }
    if !tau_p.is_positive() {
        return Err(Error::InvalidSpec("norm-growth parameter must be positive".into()));
    }
    let r = tau_p.recip();
    let mut sum = Rat::zero();
    let mut p = Rat::one();
    for _ in 0..ell - 1 {
        sum += &p;
        p *= &r;
    }
    if tau_p != &Rat::one() {
        let closed = (Rat::one() - rat_pow(&r, ell - 1)) / (Rat::one() - &r);
        if closed != sum {
            return Err(Error::Internal("weight sum disagrees with its closed form".into()));
        }
    }
    if tau_p >= &Rat::one() && sum > Rat::from_integer(BigInt::from(ell as i64 - 1)) {
        return Err(Error::Internal("weight sum exceeds its cap ell - 1".into()));
    }
    Ok(sum)
}

/// Certify the per-index hypotheses sigma_j >= sigma', tau_j >= tau' for
/// j in [k, k+ell-3] and the norm-growth product bound across the run.
/// Returns the product enclosure.
fn verify_run_hypotheses(
    stats: &ApproximationStats,
    k: usize,
    ell: usize,
    sigma_p: &Rat,
    tau_p: &Rat,
    tau_star: &Rat,
) -> Result<Interval> {
    if sigma_p <= &Rat::one() {
        return Err(Error::InvalidSpec("error-decay parameter must exceed 1".into()));
    }
    if tau_p < &Rat::one() || tau_star < &Rat::one() {
        return Err(Error::InvalidSpec("norm-growth parameters must be at least 1".into()));
    }
    for j in k..=k + ell - 3 {
        let s = per_index(stats, |s, k| s.sigma_at(k), j, "sigma")?;
        if &s.hi < sigma_p {
            return Err(Error::HypothesisNotMet(format!(
                "error-decay quotient at index {j} certifiably below {sigma_p}"
            )));
        }
        if &s.lo < sigma_p {
            return Err(Error::HypothesisNotCertifiable(format!(
                "error-decay quotient at index {j} not certifiably at least {sigma_p}"
            )));
        }
        // tau' = 1 needs no enclosure: norms increase strictly, so every
        // norm-growth quotient exceeds 1 by construction.
        if tau_p > &Rat::one() {
            let t = per_index(stats, |s, k| s.tau_at(k), j, "tau")?;
            if &t.hi < tau_p {
                return Err(Error::HypothesisNotMet(format!(
                    "norm-growth quotient at index {j} certifiably below {tau_p}"
                )));
            }
            if &t.lo < tau_p {
                return Err(Error::HypothesisNotCertifiable(format!(
                    "norm-growth quotient at index {j} not certifiably at least {tau_p}"
                )));
            }
        }
    }
    let mut prod = Interval::from_int(1);
    for j in k..=k + ell - 2 {
        let t = per_index(stats, |s, k| s.tau_at(k), j, "tau")?;
        prod = prod.mul(&t);
    }
    if &prod.lo > tau_star {
        return Err(Error::HypothesisNotMet(format!(
            "norm-growth product across the run certifiably exceeds {tau_star}"
        )));
    }
    if &prod.hi > tau_star {
        return Err(Error::HypothesisNotCertifiable(format!(
            "norm-growth product across the run not certifiably at most {tau_star}"
        )));
    }
    Ok(prod)
}

/// Rearranged form of the run criterion: solves the firing condition for
/// the run length.  Meaningful for tau' > 1 only.
fn run_length_form(
    ell: usize,
    sigma_p: &Rat,
    tau_p: &Rat,
    tau_star: &Rat,
    what: &Interval,
) -> Result<Fired> {
    // inner(w) = 1 - ((tau'-1)/tau') (w tau'(sigma'-1) + tau'-1)/tau*,
    // exactly evaluated and decreasing in w.
    let inner_at = |w: &Rat| -> Rat {
        let num = w * tau_p * (sigma_p - &Rat::one()) + tau_p - &Rat::one();
        Rat::one() - (tau_p - &Rat::one()) / tau_p * num / tau_star
    };
    let inner = Interval::new(inner_at(&what.hi), inner_at(&what.lo));
    if !inner.hi.is_positive() {
        // The condition degenerates: every run length fires.
        return Ok(Fired::Yes);
    }
    if !inner.lo.is_positive() {
        return Ok(Fired::Inconclusive);
    }
    let rhs = Interval::from_int(1).sub(&ln_interval(&inner, LOG_BITS)?.div(&ln_rat(tau_p, LOG_BITS)?)?);
    Ok(fired_when_index_below(ell, &rhs))
}

/// Run criterion with explicit parameters: fires when the surrogate
/// exceeds (tau* Lambda - tau' + 1)/(tau' (sigma' - 1)), predicting
/// independence of z_k .. z_{k+ell-1}.  The rearranged length form is
/// evaluated as an internal consistency check.
pub fn criterion_rr(
    stats: &ApproximationStats,
    k: usize,
    ell: usize,
    sigma_p: &Rat,
    tau_p: &Rat,
    tau_star: &Rat,
    what: &Interval,
) -> Result<CriterionVerdict> {
    if ell < 3 {
        return Err(Error::InvalidSpec("run criterion needs at least 3 points".into()));
    }
    let prod = verify_run_hypotheses(stats, k, ell, sigma_p, tau_p, tau_star)?;
    let lam = lambda_sum(tau_p, ell)?;
    let threshold =
        (tau_star * &lam - tau_p + Rat::one()) / (tau_p * (sigma_p - &Rat::one()));
    let fired = fired_when_above(what, &Interval::point(threshold.clone()));
    if tau_p > &Rat::one() {
        let alt = run_length_form(ell, sigma_p, tau_p, tau_star, what)?;
        if contradicts(fired, alt) {
            return Err(Error::Internal(format!(
                "run criterion forms disagree at k={k}, ell={ell}: {fired} vs {alt}"
            )));
        }
    }
    Ok(CriterionVerdict::new(CriterionId::Rr, k, ell, fired)
        .with("uniform_lower", what.clone())
        .with("weight_sum", Interval::point(lam))
        .with("norm_growth_product", prod)
        .with("threshold", Interval::point(threshold)))
}

/// The two simplified run criteria, plus the unconditional exponent cap
/// they imply at the forced-dependence length.
#[derive(Clone, Debug)]
pub struct FehlVerdict {
    pub susdortn: CriterionVerdict,
    pub sushier: CriterionVerdict,
    /// what <= (m+n) tau* / (sigma' - 1), reported as an audit line.
    pub window_cap: AuditLine,
}

/// Simplified run criteria: fires when
/// ell < (sigma'-1)/tau* (what + tau' - 1) + 1 (first form) or
/// ell < (sigma'-1)/tau* what + 1 (weaker form).  The weaker form firing
/// implies the first fires; violating that ordering is an internal error.
pub fn criterion_fehl(
    stats: &ApproximationStats,
    k: usize,
    ell: usize,
    sigma_p: &Rat,
    tau_p: &Rat,
    tau_star: &Rat,
    what: &Interval,
) -> Result<FehlVerdict> {
    if ell < 3 {
        return Err(Error::InvalidSpec("run criterion needs at least 3 points".into()));
    }
    let prod = verify_run_hypotheses(stats, k, ell, sigma_p, tau_p, tau_star)?;
    let scale = (sigma_p - &Rat::one()) / tau_star;
    let one = Interval::from_int(1);
    let shift = Interval::point(tau_p - &Rat::one());
    let rhs_full = what.add(&shift).scale(&scale).add(&one);
    let rhs_weak = what.scale(&scale).add(&one);
    if rhs_full.lo < rhs_weak.lo || rhs_full.hi < rhs_weak.hi {
        return Err(Error::Internal(
            "shifted run bound fell below the unshifted one".into(),
        ));
    }
    let fired_full = fired_when_index_below(ell, &rhs_full);
    let fired_weak = fired_when_index_below(ell, &rhs_weak);
    if fired_weak == Fired::Yes && fired_full == Fired::No {
        return Err(Error::Internal(
            "weaker run criterion fired while the implied one did not".into(),
        ));
    }
    let susdortn = CriterionVerdict::new(CriterionId::FehlSusdortn, k, ell, fired_full)
        .with("uniform_lower", what.clone())
        .with("norm_growth_product", prod.clone())
        .with("threshold", rhs_full);
    let sushier = CriterionVerdict::new(CriterionId::FehlSushier, k, ell, fired_weak)
        .with("uniform_lower", what.clone())
        .with("norm_growth_product", prod)
        .with("threshold", rhs_weak);
    let h = stats.m + stats.n;
    let cap_rhs = Interval::point(
        Rat::from_integer(BigInt::from(h as i64)) * tau_star / (sigma_p - &Rat::one()),
    );
    let window_cap = AuditLine {
        name: "uniform_capped_by_window_product".into(),
        verdict: stats::judge(what, &cap_rhs),
        lhs: what.clone(),
        rhs: cap_rhs,
        note: "cap from the forced dependence of m+n+1 consecutive points".into(),
    };
    Ok(FehlVerdict {
        susdortn,
        sushier,
        window_cap,
    })
}

// ---------------------------------------------------------------------------
// Consecutive-triple criterion from two approximation qualities.

/// The three alternative conditions on (nu_k, nu_{k+1}), any of which
/// predicts independence of z_k, z_{k+1}, z_{k+2}.
#[derive(Clone, Debug)]
pub struct TripleVerdict {
    pub nr1: CriterionVerdict,
    pub nr3: CriterionVerdict,
    pub nr2: CriterionVerdict,
}

impl TripleVerdict {
    pub fn parts(&self) -> [&CriterionVerdict; 3] {
        [&self.nr1, &self.nr3, &self.nr2]
    }

    pub fn parts_mut(&mut self) -> [&mut CriterionVerdict; 3] {
        [&mut self.nr1, &mut self.nr3, &mut self.nr2]
    }

    /// Disjunction of the three conditions.
    pub fn any_fired(&self) -> Fired {
        let parts = self.parts();
        if parts.iter().any(|v| v.fired == Fired::Yes) {
            Fired::Yes
        } else if parts.iter().all(|v| v.fired == Fired::No) {
            Fired::No
        } else {
            Fired::Inconclusive
        }
    }
}

/// Evaluate the three conditions:
///   nu_k - eps               > (tau_k tau_{k+1} + 1)/(sigma_k - 1),
///   nu_k + 1 + eps           < tau_k (nu_{k+1} - tau_{k+1}),
///   tau_k (tau_k nu_{k+1} - nu_k) w^2 - nu_k w - tau_k nu_k nu_{k+1} > eps.
/// The second is cross-checked against its division-free rearrangement;
/// the bracket of the third is positive by the product identity, and an
/// enclosure contradicting that is an internal error.
pub fn criterion_202(
    stats: &ApproximationStats,
    k: usize,
    what: &Interval,
    eps: &Rat,
) -> Result<TripleVerdict> {
    require_positive_eps(eps)?;
    let nu_k = per_index(stats, |s, k| s.nu_at(k), k, "nu")?;
    let nu_next = per_index(stats, |s, k| s.nu_at(k), k + 1, "nu")?;
    let tau_k = per_index(stats, |s, k| s.tau_at(k), k, "tau")?;
    let tau_next = per_index(stats, |s, k| s.tau_at(k), k + 1, "tau")?;
    let sigma_k = per_index(stats, |s, k| s.sigma_at(k), k, "sigma")?;
    let one = Interval::from_int(1);
    let eps_iv = Interval::point(eps.clone());

    let denom = sigma_k.sub(&one);
    let nr1 = if denom.contains_zero() {
        CriterionVerdict::new(CriterionId::Nr1, k, 3, Fired::Inconclusive)
            .noted("error-decay quotient not separated from 1")
    } else {
        let lhs = nu_k.sub(&eps_iv);
        let rhs = tau_k.mul(&tau_next).add(&one).div(&denom)?;
        CriterionVerdict::new(CriterionId::Nr1, k, 3, fired_when_above(&lhs, &rhs))
            .with("lhs", lhs)
            .with("threshold", rhs)
    };

    let lhs3 = nu_k.add(&one).add(&eps_iv);
    let gap = nu_next.sub(&tau_next);
    let rhs3 = tau_k.mul(&gap);
    let fired3 = fired_when_below(&lhs3, &rhs3);
    if !tau_k.contains_zero() {
        let alt = fired_when_above(&gap, &lhs3.div(&tau_k)?);
        if contradicts(fired3, alt) {
            return Err(Error::Internal(format!(
                "triple criterion forms disagree at k={k}: {fired3} vs {alt}"
            )));
        }
    }
    let nr3 = CriterionVerdict::new(CriterionId::Nr3, k, 3, fired3)
        .with("lhs", lhs3)
        .with("threshold", rhs3);

    let bracket = tau_k.mul(&nu_next).sub(&nu_k);
    if !bracket.hi.is_positive() {
        return Err(Error::Internal(format!(
            "quadratic bracket certifiably nonpositive at k={k}, contradicting the product identity"
        )));
    }
    let expr = tau_k
        .mul(&bracket)
        .mul(&what.square())
        .sub(&nu_k.mul(what))
        .sub(&tau_k.mul(&nu_k).mul(&nu_next));
    let nr2 = CriterionVerdict::new(CriterionId::Nr2, k, 3, fired_when_above(&expr, &eps_iv))
        .with("uniform_lower", what.clone())
        .with("lhs", expr)
        .with("threshold", eps_iv);

    Ok(TripleVerdict { nr1, nr3, nr2 })
}

// ---------------------------------------------------------------------------
// Span lattice evidence.

/// Shortest-vector evidence in the saturated span lattice of a run of
/// consecutive points.
#[derive(Clone, Debug)]
pub struct ClassEvidence {
    pub h: usize,
    pub t: usize,
    /// Dimension of the real span of the run.
    pub span_dim: usize,
    /// Shortest vector found in span cap Z^(m+n), canonically signed.
    pub vector: Vec<BigInt>,
    pub norm: BigInt,
    /// log ||v|| / log ||z_t||, certified nonnegative.
    pub delta: Interval,
    /// True when enumeration certified the vector as a shortest one.
    pub certified_shortest: bool,
    /// Heuristic flag: delta certifiably at or below the threshold.
    pub evidence: bool,
}

/// Saturate the span lattice of z_t .. z_{t+h-1}, reduce it, and report
/// the shortest vector found together with its height exponent delta.
/// For h <= 4 the reduced lattice is enumerated, certifying the result.
pub fn detect_short_vector(
    seq: &[MinimalPoint],
    h: usize,
    t: usize,
    threshold: &Rat,
) -> Result<ClassEvidence> {
    if h < 1 {
        return Err(Error::InvalidSpec("span run must be nonempty".into()));
    }
    let rows = window_points(seq, t, h)?;
    let dim = rows[0].len();
    let a = IntMat::from_rows(rows)?;
    let rank = a.exact_rank();
    if h >= 2 && rank < 2 {
        return Err(Error::Internal(
            "consecutive minimal points cannot be proportional".into(),
        ));
    }

    // The saturated lattice span cap Z^dim is the integer orthogonal
    // complement of the kernel of the stacked points.
    let span_kernel = a.kernel_basis();
    let basis = if span_kernel.is_empty() {
        IntMat::identity(dim).rows_vec()
    } else {
        IntMat::from_rows(span_kernel.clone())?.kernel_basis()
    };
    if basis.len() != rank {
        return Err(Error::Internal(format!(
            "saturated basis has {} rows, span has dimension {rank}",
            basis.len()
        )));
    }

    let reduced = lll_reduce(basis)?.basis;
    let mut vector = canonical_sign(
        reduced
            .iter()
            .min_by_key(|r| inf_norm(r))
            .expect("nonempty basis"),
    );
    let mut certified = false;
    if h <= 4 {
        match kernel_vectors_within(&reduced, &inf_norm(&vector), NODE_LIMIT) {
            Ok(cands) => {
                for c in cands {
                    let (nc, nv) = (inf_norm(&c), inf_norm(&vector));
                    if nc < nv || (nc == nv && c < vector) {
                        vector = c;
                    }
                }
                certified = true;
            }
            Err(Error::NeedsPrecision(_)) => {}
            Err(e) => return Err(e),
        }
    }
    for krow in &span_kernel {
        if !dot(krow, &vector).is_zero() {
            return Err(Error::Internal(
                "reduced vector left the saturated span lattice".into(),
            ));
        }
    }

    let norm = inf_norm(&vector);
    let base = seq
        .iter()
        .find(|p| p.k == t)
        .expect("window_points checked t");
    if base.norm < BigInt::from(2) {
        return Err(Error::DegenerateWindow(
            "run starts at a height-1 point; the exponent is undefined".into(),
        ));
    }
    let ln_v = ln_rat(&Rat::from_integer(norm.clone()), LOG_BITS)?;
    let ln_z = ln_rat(&Rat::from_integer(base.norm.clone()), LOG_BITS)?;
    let raw = ln_v.div(&ln_z)?;
    let delta = Interval::new(raw.lo.max(Rat::zero()), raw.hi.max(Rat::zero()));
    let evidence = delta.hi <= *threshold;
    Ok(ClassEvidence {
        h,
        t,
        span_dim: rank,
        vector,
        norm,
        delta,
        certified_shortest: certified,
        evidence,
    })
}

/// Exact dimension of the span of the computed tail z_k, k >= k0.  Finite
/// data upper-bounds the eventual span dimension; it is never below 2.
#[derive(Clone, Debug)]
pub struct RankEvidence {
    pub k0: usize,
    pub points_used: usize,
    pub dim: usize,
}

pub fn estimate_r(seq: &[MinimalPoint], k0: usize) -> Result<RankEvidence> {
    let rows: Vec<Vec<BigInt>> = seq
        .iter()
        .filter(|p| p.k >= k0)
        .map(|p| p.z.clone())
        .collect();
    if rows.len() < 2 {
        return Err(Error::DegenerateWindow(
            "tail needs at least two computed points".into(),
        ));
    }
    let points_used = rows.len();
    let dim = IntMat::from_rows(rows)?.exact_rank();
    if dim < 2 {
        return Err(Error::Internal(
            "tail of a minimal chain spans at least two dimensions".into(),
        ));
    }
    Ok(RankEvidence {
        k0,
        points_used,
        dim,
    })
}

// ---------------------------------------------------------------------------
// Soundness audit.

#[derive(Clone, Debug)]
pub struct AuditConfig {
    /// Smallest chain index treated as "large"; criteria are not evaluated
    /// below it.  Firings near this cutoff carry asymptotic slack absorbed
    /// by epsilon.
    pub k0: usize,
    pub epsilon: Rat,
    /// Smallest window depth worth auditing.
    pub min_depth: usize,
    /// Use n/m as the surrogate instead of the window minimum.
    pub use_dim_ratio: bool,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            k0: 5,
            epsilon: Rat::new(BigInt::one(), BigInt::from(20)),
            min_depth: 4,
            use_dim_ratio: false,
        }
    }
}

/// A fired criterion whose implicated points are dependent: an arithmetic
/// or precision-contract bug, reported with full state.
#[derive(Clone, Debug)]
pub struct Incident {
    pub verdict: CriterionVerdict,
    pub run_start: usize,
    pub points: Vec<Vec<BigInt>>,
    pub message: String,
}

#[derive(Clone, Debug, Default)]
pub struct SoundnessReport {
    pub verdicts: Vec<CriterionVerdict>,
    /// Hypothesis sets that could not be certified, with reasons.
    pub skipped: Vec<String>,
    pub incidents: Vec<Incident>,
}

impl SoundnessReport {
    pub fn has_incidents(&self) -> bool {
        !self.incidents.is_empty()
    }

    pub fn fired_count(&self) -> usize {
        self.verdicts
            .iter()
            .filter(|v| v.fired == Fired::Yes)
            .count()
    }
}

fn audit_run(
    seq: &[MinimalPoint],
    verdict: &mut CriterionVerdict,
    run_start: usize,
    incidents: &mut Vec<Incident>,
) -> Result<()> {
    let pts = window_points(seq, run_start, verdict.ell)?;
    let rank = IntMat::from_rows(pts.clone())?.exact_rank();
    verdict.record_rank(rank);
    if verdict.sound == Some(false) {
        incidents.push(Incident {
            verdict: verdict.clone(),
            run_start,
            points: pts,
            message: format!(
                "{} fired at k={run_start} but the {} points have rank {rank}",
                verdict.id, verdict.ell
            ),
        });
    }
    Ok(())
}

/// Evaluate every criterion at every admissible index of the window and
/// cross-check each fired instance against the exact rank of the
/// implicated points.  Statistics must have been computed from `seq`;
/// hand-assembled values are refused.
pub fn soundness_audit(
    seq: &[MinimalPoint],
    stats: &ApproximationStats,
    cfg: &AuditConfig,
) -> Result<SoundnessReport> {
    match &stats.provenance {
        Provenance::Synthetic => {
            return Err(Error::InvalidSpec(
                "soundness audit needs chain-derived statistics".into(),
            ))
        }
        Provenance::Computed { fingerprint } => {
            let fp = stats::window_fingerprint(seq, stats.m, stats.n, stats.k0, stats.k_max)?;
            if fp != *fingerprint {
                return Err(Error::InvalidSpec(
                    "statistics were not computed from this sequence".into(),
                ));
            }
        }
    }
    if stats.window_depth() < cfg.min_depth {
        return Err(Error::DegenerateWindow(format!(
            "window depth {} below the audit minimum {}",
            stats.window_depth(),
            cfg.min_depth
        )));
    }

    let dim = stats.m + stats.n;
    let what = stats.uniform_surrogate(cfg.use_dim_ratio);
    let base = cfg.k0.max(stats.k0);
    let mut report = SoundnessReport::default();

    // Triple criteria, one instance per admissible index.
    if stats.k_max >= 2 {
        for k in base..=stats.k_max - 2 {
            let mut v = criterion_spez(stats, k, &what, &cfg.epsilon)?;
            audit_run(seq, &mut v, k, &mut report.incidents)?;
            report.verdicts.push(v);

            let mut triple = criterion_202(stats, k, &what, &cfg.epsilon)?;
            for v in triple.parts_mut() {
                audit_run(seq, v, k, &mut report.incidents)?;
            }
            let TripleVerdict { nr1, nr3, nr2 } = triple;
            report.verdicts.extend([nr1, nr3, nr2]);
        }
    }

    // Window length bounds; a run length above the ambient dimension can
    // never fire soundly, so evaluating it extends the audit.
    for ell in 2..=dim + 1 {
        for variant in [WindowVariant::Strong, WindowVariant::Simple] {
            let mut v = match criterion_window(stats, ell, variant, &what) {
                Ok(v) => v,
                Err(Error::HypothesisNotCertifiable(msg)) => {
                    report.skipped.push(format!("window length {ell}: {msg}"));
                    continue;
                }
                Err(e) => return Err(e),
            };
            if stats.k_max + 1 >= ell {
                let mut worst: Option<usize> = None;
                for run in base..=stats.k_max + 1 - ell {
                    let pts = window_points(seq, run, ell)?;
                    let rank = IntMat::from_rows(pts.clone())?.exact_rank();
                    worst = Some(worst.map_or(rank, |w| w.min(rank)));
                    if v.fired == Fired::Yes && rank < ell {
                        let mut failed = v.clone();
                        failed.record_rank(rank);
                        report.incidents.push(Incident {
                            verdict: failed,
                            run_start: run,
                            points: pts,
                            message: format!(
                                "{} fired for runs of {ell} but rank at k={run} is {rank}",
                                v.id
                            ),
                        });
                    }
                }
                if let Some(w) = worst {
                    v.ground_truth = Some(w);
                    v.sound = Some(v.fired != Fired::Yes || w == ell);
                }
            }
            report.verdicts.push(v);
        }
    }

    // Run criteria with window-derived certified parameters.
    for ell in 3..=dim + 1 {
        if stats.k_max + 1 < ell {
            continue;
        }
        for k in base..=stats.k_max + 1 - ell {
            let mut sigma_p: Option<Rat> = None;
            let mut tau_floor: Option<Rat> = None;
            for j in k..=k + ell - 3 {
                let (Some(s), Some(t)) = (stats.sigma_at(j), stats.tau_at(j)) else {
                    sigma_p = None;
                    break;
                };
                sigma_p = Some(sigma_p.map_or(s.lo.clone(), |c: Rat| c.min(s.lo.clone())));
                tau_floor = Some(tau_floor.map_or(t.lo.clone(), |c: Rat| c.min(t.lo.clone())));
            }
            let Some(sigma_p) = sigma_p else { continue };
            if sigma_p <= Rat::one() {
                report.skipped.push(format!(
                    "run at k={k}, ell={ell}: error-decay floor not above 1"
                ));
                continue;
            }
            let tau_p = tau_floor
                .filter(|t| t > &Rat::one())
                .unwrap_or_else(Rat::one);
            let mut prod = Interval::from_int(1);
            let mut complete = true;
            for j in k..=k + ell - 2 {
                match stats.tau_at(j) {
                    Some(t) => prod = prod.mul(t),
                    None => {
                        complete = false;
                        break;
                    }
                }
            }
            if !complete {
                continue;
            }
            let tau_star = prod.hi.clone();

            let mut v = criterion_rr(stats, k, ell, &sigma_p, &tau_p, &tau_star, &what)?;
            audit_run(seq, &mut v, k, &mut report.incidents)?;
            report.verdicts.push(v);

            let fehl = criterion_fehl(stats, k, ell, &sigma_p, &tau_p, &tau_star, &what)?;
            let FehlVerdict {
                mut susdortn,
                mut sushier,
                window_cap: _,
            } = fehl;
            audit_run(seq, &mut susdortn, k, &mut report.incidents)?;
            audit_run(seq, &mut sushier, k, &mut report.incidents)?;
            report.verdicts.push(susdortn);
            report.verdicts.push(sushier);
        }
    }

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::rat_i64;
    use crate::minimal::{minimal_point_sequence, EngineConfig, SequenceRequest, ThetaMatrix};
    use crate::realspec::RealSpec;
    use crate::stats::{compute_stats, StatsRequest, Verdict};

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

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(BigInt::from(n), BigInt::from(d))
    }

    /// Hand-assembled per-index statistics: nu over [k0, k0+len-1], the
    /// quotient arrays one shorter, extrema folded elementwise.
    fn synth_indexed(
        m: usize,
        n: usize,
        k0: usize,
        nu: &[Rat],
        sigma: &[Rat],
        tau: &[Rat],
    ) -> ApproximationStats {
        assert_eq!(sigma.len(), nu.len() - 1);
        assert_eq!(tau.len(), nu.len() - 1);
        let point = |r: &Rat| Interval::point(r.clone());
        let fold = |xs: &[Rat], pick_min: bool| {
            let mut acc = xs[0].clone();
            for x in &xs[1..] {
                acc = if pick_min {
                    acc.min(x.clone())
                } else {
                    acc.max(x.clone())
                };
            }
            Interval::point(acc)
        };
        let idx = |xs: &[Rat]| -> Vec<(usize, Interval)> {
            xs.iter().enumerate().map(|(i, r)| (k0 + i, point(r))).collect()
        };
        ApproximationStats {
            m,
            n,
            k0,
            k_max: k0 + nu.len() - 1,
            nu: idx(nu),
            tau: idx(tau),
            sigma: idx(sigma),
            what: idx(&nu[..nu.len() - 1]),
            sigma_lower: fold(sigma, true),
            sigma_upper: fold(sigma, false),
            tau_lower: fold(tau, true),
            tau_upper: fold(tau, false),
            nu_lower: fold(nu, true),
            nu_upper: fold(nu, false),
            w_est: fold(nu, false),
            what_lower: fold(nu, true),
            tau_star: None,
            pigeonhole_margin: None,
            provenance: Provenance::Synthetic,
        }
    }

    #[test]
    fn independence_ground_truth() {
        let pts = golden_chain(6);
        let pair = vec![pts[2].z.clone(), pts[3].z.clone()];
        assert!(check_independent(&pair).unwrap());

        let v = vec![BigInt::from(3), BigInt::from(-1)];
        let dbl = vec![BigInt::from(6), BigInt::from(-2)];
        assert!(!check_independent(&[v, dbl].to_vec()).unwrap());

        let rows = vec![
            vec![BigInt::from(1), BigInt::from(0), BigInt::from(1)],
            vec![BigInt::from(0), BigInt::from(1), BigInt::from(1)],
            vec![BigInt::from(1), BigInt::from(1), BigInt::from(2)],
        ];
        assert!(!check_independent(&rows).unwrap());
    }

    #[test]
    fn triple_quotient_criterion_worked_example() {
        // sigma_k = 3, tau_k = tau_{k+1} = 2: threshold (2 + 1/2)/2 + 0.1.
        let st = synth_indexed(
            1,
            1,
            5,
            &[rat(2, 1), rat(2, 1), rat(2, 1)],
            &[rat(3, 1), rat(3, 1)],
            &[rat(2, 1), rat(2, 1)],
        );
        let eps = rat(1, 10);
        let v = criterion_spez(&st, 5, &Interval::from_int(4), &eps).unwrap();
        assert_eq!(v.fired, Fired::Yes);
        let thr = v.hypothesis_value("threshold").unwrap();
        assert!(thr.contains(&rat(27, 20)), "threshold {thr:?}");

        // Error decay barely above 1: the threshold explodes, no firing.
        let mut slow = st.clone();
        slow.sigma[0].1 = Interval::point(rat(10001, 10000));
        let v = criterion_spez(&slow, 5, &Interval::from_int(4), &eps).unwrap();
        assert_eq!(v.fired, Fired::No);

        // Surrogate enclosure straddling the threshold: inconclusive.
        let w = Interval::new(rat(12, 10), rat(15, 10));
        let v = criterion_spez(&st, 5, &w, &eps).unwrap();
        assert_eq!(v.fired, Fired::Inconclusive);

        // Larger surrogate never unfires.
        let small = criterion_spez(&st, 5, &Interval::from_int(2), &eps).unwrap();
        let large = criterion_spez(&st, 5, &Interval::from_int(4), &eps).unwrap();
        assert!(!(small.fired == Fired::Yes && large.fired == Fired::No));
    }

    #[test]
    fn window_length_bound_worked_example() {
        let two = Interval::from_int(2);
        let st = ApproximationStats::synthetic(
            1,
            1,
            two.clone(),
            two.clone(),
            two.clone(),
            two.clone(),
            Interval::from_int(4),
            Interval::from_int(3),
        );
        let what = Interval::from_int(3);
        // Simple variant: threshold 1 + log2(4) = 3.
        let v2 = criterion_window(&st, 2, WindowVariant::Simple, &what).unwrap();
        assert_eq!(v2.fired, Fired::Yes);
        let v3 = criterion_window(&st, 3, WindowVariant::Simple, &what).unwrap();
        assert_ne!(v3.fired, Fired::Yes, "boundary length must not fire");
        let v4 = criterion_window(&st, 4, WindowVariant::Simple, &what).unwrap();
        assert_eq!(v4.fired, Fired::No);

        // Strong variant: threshold 1 + log2(4.5), fires through length 3.
        let s3 = criterion_window(&st, 3, WindowVariant::Strong, &what).unwrap();
        assert_eq!(s3.fired, Fired::Yes);
        let s4 = criterion_window(&st, 4, WindowVariant::Strong, &what).unwrap();
        assert_eq!(s4.fired, Fired::No);

        // The threshold grows with the surrogate.
        let lo = criterion_window(&st, 2, WindowVariant::Simple, &Interval::from_int(1)).unwrap();
        let t_lo = lo.hypothesis_value("threshold").unwrap();
        let t_hi = v2.hypothesis_value("threshold").unwrap();
        assert!(t_lo.lo <= t_hi.lo && t_lo.hi <= t_hi.hi);
        assert!(!(lo.fired == Fired::Yes && v2.fired == Fired::No));
    }

    #[test]
    fn window_length_bound_needs_certified_quotients() {
        let touching = Interval::new(Rat::one(), rat(3, 2));
        let st = ApproximationStats::synthetic(
            1,
            1,
            touching,
            Interval::from_int(2),
            Interval::from_int(2),
            Interval::from_int(2),
            Interval::from_int(4),
            Interval::from_int(3),
        );
        let err =
            criterion_window(&st, 2, WindowVariant::Simple, &Interval::from_int(3)).unwrap_err();
        assert!(matches!(err, Error::HypothesisNotCertifiable(_)));
    }

    #[test]
    fn weight_sum_identities() {
        for ell in 2..=8usize {
            let lam = lambda_sum(&Rat::one(), ell).unwrap();
            assert_eq!(lam, Rat::from_integer(BigInt::from(ell as i64 - 1)));
        }
        assert_eq!(lambda_sum(&rat(2, 1), 3).unwrap(), rat(3, 2));
        assert_eq!(lambda_sum(&rat(3, 1), 4).unwrap(), rat(13, 9));
    }

    #[test]
    fn run_criterion_worked_examples() {
        // sigma_j = 2 at j = 5; tau_5 = tau_6 = 2with product 4 = tau*.
        let st = synth_indexed(
            1,
            1,
            5,
            &[rat(2, 1), rat(2, 1), rat(2, 1), rat(2, 1)],
            &[rat(2, 1), rat(2, 1), rat(2, 1)],
            &[rat(2, 1), rat(2, 1), rat(2, 1)],
        );
        let (sp, tp, ts) = (rat(2, 1), Rat::one(), rat(4, 1));
        let v = criterion_rr(&st, 5, 3, &sp, &tp, &ts, &Interval::from_int(10)).unwrap();
        assert_eq!(v.fired, Fired::Yes);
        assert_eq!(
            v.hypothesis_value("threshold").unwrap(),
            &Interval::from_int(8)
        );
        let v = criterion_rr(&st, 5, 3, &sp, &tp, &ts, &Interval::from_int(5)).unwrap();
        assert_eq!(v.fired, Fired::No);

        // tau' = 2 exercises the rearranged-form cross-check.
        let tp2 = rat(2, 1);
        let v = criterion_rr(&st, 5, 3, &sp, &tp2, &ts, &Interval::from_int(10)).unwrap();
        assert_eq!(v.fired, Fired::Yes);
        assert_eq!(
            v.hypothesis_value("threshold").unwrap(),
            &Interval::point(rat(5, 2))
        );
        let v = criterion_rr(&st, 5, 3, &sp, &tp2, &ts, &Interval::from_int(2)).unwrap();
        assert_eq!(v.fired, Fired::No);
    }

    #[test]
    fn run_criterion_hypothesis_certification() {
        let st = synth_indexed(
            1,
            1,
            5,
            &[rat(2, 1), rat(2, 1), rat(2, 1), rat(2, 1)],
            &[rat(3, 2), rat(2, 1), rat(2, 1)],
            &[rat(2, 1), rat(2, 1), rat(2, 1)],
        );
        // sigma_5 = 3/2 certifiably below sigma' = 2.
        let err = criterion_rr(
            &st,
            5,
            3,
            &rat(2, 1),
            &Rat::one(),
            &rat(4, 1),
            &Interval::from_int(10),
        )
        .unwrap_err();
        assert!(matches!(err, Error::HypothesisNotMet(_)));

        // Straddling enclosure: certification fails the other way.
        let mut wide = st.clone();
        wide.sigma[0].1 = Interval::new(rat(19, 10), rat(21, 10));
        let err = criterion_rr(
            &wide,
            5,
            3,
            &rat(2, 1),
            &Rat::one(),
            &rat(4, 1),
            &Interval::from_int(10),
        )
        .unwrap_err();
        assert!(matches!(err, Error::HypothesisNotCertifiable(_)));

        // Norm-growth product certifiably above tau*.
        let err = criterion_rr(
            &st,
            6,
            3,
            &rat(2, 1),
            &Rat::one(),
            &rat(39, 10),
            &Interval::from_int(10),
        )
        .unwrap_err();
        assert!(matches!(err, Error::HypothesisNotMet(_)));
    }

    #[test]
    fn simplified_run_criteria_worked_example() {
        let st = synth_indexed(
            1,
            1,
            5,
            &[rat(2, 1), rat(2, 1), rat(2, 1), rat(2, 1)],
            &[rat(3, 1), rat(3, 1), rat(3, 1)],
            &[rat(7, 5), rat(7, 5), rat(7, 5)],
        );
        // (sigma'-1)/tau* = 1; both thresholds are 5 at surrogate 4.
        let fehl = criterion_fehl(
            &st,
            5,
            3,
            &rat(3, 1),
            &Rat::one(),
            &rat(2, 1),
            &Interval::from_int(4),
        )
        .unwrap();
        assert_eq!(fehl.sushier.fired, Fired::Yes);
        assert_eq!(fehl.susdortn.fired, Fired::Yes);
        assert_eq!(
            fehl.sushier.hypothesis_value("threshold").unwrap(),
            &Interval::from_int(5)
        );
        // Surrogate 4 exceeds the cap 2*2/2 = 2: honest report that these
        // parameters cannot come from a real chain.
        assert_eq!(fehl.window_cap.verdict, Verdict::ViolatedAtFiniteHorizon);
    }

    #[test]
    fn forced_dependence_length_never_fires_on_chain_data() {
        let pts = golden_chain(12);
        let stats = compute_stats(&pts, 1, 1, &StatsRequest::window(2, 11)).unwrap();
        let what = stats.uniform_surrogate(false);
        // Certified parameters straight from the window.
        let k = 5;
        let sigma_p = (k..=k)
            .map(|j| stats.sigma_at(j).unwrap().lo.clone())
            .min()
            .unwrap();
        assert!(sigma_p > Rat::one());
        let prod = stats.tau_at(k).unwrap().mul(stats.tau_at(k + 1).unwrap());
        let fehl = criterion_fehl(&stats, k, 3, &sigma_p, &Rat::one(), &prod.hi, &what).unwrap();
        assert_ne!(fehl.susdortn.fired, Fired::Yes);
        assert_ne!(fehl.sushier.fired, Fired::Yes);
        assert_ne!(
            fehl.window_cap.verdict,
            Verdict::ViolatedAtFiniteHorizon,
            "cap must hold on real data"
        );
    }

    #[test]
    fn two_quality_triple_worked_example() {
        let st = synth_indexed(
            1,
            1,
            5,
            &[rat(2, 1), rat(5, 1), rat(5, 1)],
            &[rat(5, 1), rat(2, 1)],
            &[rat(2, 1), rat(2, 1)],
        );
        let eps = rat(1, 20);
        let t = criterion_202(&st, 5, &Interval::from_int(2), &eps).unwrap();
        // (tau_k tau_{k+1} + 1)/(sigma_k - 1) = 5/4 < nu_k - eps.
        assert_eq!(t.nr1.fired, Fired::Yes);
        assert!(t
            .nr1
            .hypothesis_value("threshold")
            .unwrap()
            .contains(&rat(5, 4)));
        // nu_k + 1 + eps = 3.05 < tau_k (nu_{k+1} - tau_{k+1}) = 6.
        assert_eq!(t.nr3.fired, Fired::Yes);
        // 16 w^2 - 2w - 20 at w = 2 is 40 > eps.
        assert_eq!(t.nr2.fired, Fired::Yes);
        assert_eq!(t.any_fired(), Fired::Yes);

        // At w = 1 the quadratic is negative: no firing, and growing the
        // surrogate only ever adds firings.
        let t1 = criterion_202(&st, 5, &Interval::from_int(1), &eps).unwrap();
        assert_eq!(t1.nr2.fired, Fired::No);
        assert!(!(t1.nr2.fired == Fired::Yes && t.nr2.fired == Fired::No));
    }

    #[test]
    fn short_vector_in_full_span() {
        let pts = golden_chain(6);
        let ev = detect_short_vector(&pts, 2, 2, &rat(1, 10)).unwrap();
        assert_eq!(ev.span_dim, 2);
        assert_eq!(ev.norm, BigInt::one());
        assert!(ev.certified_shortest);
        assert!(ev.evidence, "unit vector gives delta = 0");
        assert!(ev.delta.lo >= Rat::zero());
    }

    #[test]
    fn short_vector_in_proper_sublattice() {
        let mk = |k: usize, z: [i64; 3]| {
            let z: Vec<BigInt> = z.iter().map(|&c| BigInt::from(c)).collect();
            MinimalPoint {
                k,
                norm: inf_norm(&z),
                z,
                err: Interval::new(rat(1, 8), rat(1, 8)),
            }
        };
        let pts = vec![mk(1, [1, 1, 2]), mk(2, [2, 1, 3])];
        let ev = detect_short_vector(&pts, 2, 1, &rat(1, 10)).unwrap();
        assert_eq!(ev.span_dim, 2);
        assert_eq!(ev.norm, BigInt::one());
        // The span is orthogonal to (1, 1, -1).
        let normal = vec![BigInt::from(1), BigInt::from(1), BigInt::from(-1)];
        assert!(dot(&normal, &ev.vector).is_zero());
        assert!(ev.certified_shortest);
    }

    #[test]
    fn proportional_points_are_an_internal_error() {
        let mk = |k: usize, z: [i64; 2]| {
            let z: Vec<BigInt> = z.iter().map(|&c| BigInt::from(c)).collect();
            MinimalPoint {
                k,
                norm: inf_norm(&z),
                z,
                err: Interval::new(rat(1, 8), rat(1, 8)),
            }
        };
        let pts = vec![mk(1, [1, 2]), mk(2, [2, 4])];
        let err = detect_short_vector(&pts, 2, 1, &rat(1, 10)).unwrap_err();
        assert!(matches!(err, Error::Internal(_)));
    }

    #[test]
    fn tail_span_dimensions() {
        let pts = golden_chain(8);
        let ev = estimate_r(&pts, 3).unwrap();
        assert_eq!(ev.dim, 2);
        assert!(ev.points_used >= 2);

        let sqrt2 = RealSpec::parse("surd:(0+1*sqrt(2))/1").unwrap();
        let sqrt3 = RealSpec::parse("surd:(0+1*sqrt(3))/1").unwrap();
        let theta = ThetaMatrix::new(1, 2, vec![sqrt2, sqrt3]).unwrap();
        let chain = minimal_point_sequence(
            &theta,
            &SequenceRequest::with_count(7),
            &EngineConfig::default(),
        )
        .unwrap()
        .points;
        let ev = estimate_r(&chain, 2).unwrap();
        assert_eq!(ev.dim, 3, "generic pair fills the ambient space");
    }

    #[test]
    fn audit_runs_clean_on_golden_chain() {
        let pts = golden_chain(14);
        let stats = compute_stats(&pts, 1, 1, &StatsRequest::window(2, 13)).unwrap();
        let report = soundness_audit(&pts, &stats, &AuditConfig::default()).unwrap();
        assert!(!report.has_incidents(), "{:?}", report.incidents);
        assert!(!report.verdicts.is_empty());
        // Every audited verdict carries its ground truth.
        for v in &report.verdicts {
            assert!(v.ground_truth.is_some(), "{} missing rank", v.id);
            assert_ne!(v.sound, Some(false));
        }
    }

    #[test]
    fn audit_refuses_foreign_statistics() {
        let pts = golden_chain(8);
        let synth = ApproximationStats::synthetic(
            1,
            1,
            Interval::from_int(2),
            Interval::from_int(2),
            Interval::from_int(2),
            Interval::from_int(2),
            Interval::from_int(4),
            Interval::from_int(3),
        );
        let err = soundness_audit(&pts, &synth, &AuditConfig::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidSpec(_)));

        let mut stats = compute_stats(&pts, 1, 1, &StatsRequest::window(2, 7)).unwrap();
        if let Provenance::Computed { fingerprint } = &mut stats.provenance {
            *fingerprint ^= 1;
        }
        let err = soundness_audit(&pts, &stats, &AuditConfig::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidSpec(_)));
    }

    #[test]
    fn rejects_nonpositive_epsilon() {
        let st = synth_indexed(
            1,
            1,
            5,
            &[rat(2, 1), rat(2, 1), rat(2, 1)],
            &[rat(3, 1), rat(3, 1)],
            &[rat(2, 1), rat(2, 1)],
        );
        let err = criterion_spez(&st, 5, &Interval::from_int(4), &Rat::zero()).unwrap_err();
        assert!(matches!(err, Error::InvalidSpec(_)));
        let err = criterion_202(&st, 5, &Interval::from_int(4), &rat_i64(-1)).unwrap_err();
        assert!(matches!(err, Error::InvalidSpec(_)));
    }
}
