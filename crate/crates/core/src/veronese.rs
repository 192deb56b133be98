//! Best approximation polynomials: the one-form system built on the
//! powers (theta, theta^2, ..., theta^n), with each minimal point read as
//! an integer polynomial of degree at most n evaluated at theta.  The
//! polynomial view unlocks sharper independence criteria that exploit
//! coprimality of consecutive polynomials.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::criteria::{
    contradicts, fired_when_above, fired_when_index_below, CriterionId, CriterionVerdict, Fired,
};
use crate::error::{Error, Result};
use crate::interval::{ln_interval, Interval, Rat};
use crate::intmat::IntMat;
use crate::minimal::{minimal_point_sequence, EngineConfig, MinimalPoint, SequenceRequest, ThetaMatrix};
use crate::poly::{coprime_over_q, IPoly};
use crate::realspec::RealSpec;
use crate::stats::{self, ApproximationStats, StatsRequest, Verdict};

const LOG_BITS: u32 = 160;

/// One best approximation polynomial: the polynomial of degree at most n
/// whose coefficient vector is the minimal point z_k, so its height is
/// the chain norm and |P_k(theta)| the chain error.
#[derive(Clone, Debug)]
pub struct BestPolynomial {
    pub k: usize,
    /// y + x_1 T + ... + x_n T^n, trailing zeros dropped.
    pub poly: IPoly,
    pub height: BigInt,
    /// Enclosure of |P_k(theta)|.
    pub value: Interval,
}

/// Chain of best approximation polynomials together with the underlying
/// minimal points, which carry the norms and errors the statistics read.
#[derive(Clone, Debug)]
pub struct PolynomialChain {
    pub n: usize,
    pub polys: Vec<BestPolynomial>,
    pub points: Vec<MinimalPoint>,
    pub complete: bool,
}

impl PolynomialChain {
    /// Exponent statistics of the underlying chain (m = 1).
    pub fn stats(&self, req: &StatsRequest) -> Result<ApproximationStats> {
        stats::compute_stats(&self.points, 1, self.n, req)
    }
}

/// The system (theta, theta^2, ..., theta^n) as a one-form matrix.
/// Values of certified algebraic degree at most n are refused: some
/// integer polynomial of degree n vanishes at theta exactly, so errors
/// cannot decrease forever.
pub fn veronese_system(theta: &RealSpec, n: usize) -> Result<ThetaMatrix> {
    if n == 0 {
        return Err(Error::InvalidSpec("polynomial degree must be positive".into()));
    }
    if let Some(d) = theta.algebraic_degree_bound() {
        if d <= n {
            return Err(Error::DegenerateTheta(format!(
                "value has certified algebraic degree at most {d}, \
                 so degree-{n} polynomials reach it exactly"
            )));
        }
    }
    let entries = (1..=n)
        .map(|i| RealSpec::power(theta.clone(), i as u32))
        .collect::<Result<Vec<_>>>()?;
    ThetaMatrix::new(1, n, entries)
}

fn to_polynomial(p: &MinimalPoint, n: usize) -> Result<BestPolynomial> {
    if p.z.len() != n + 1 {
        return Err(Error::ShapeMismatch(format!(
            "point has {} coordinates, expected {}",
            p.z.len(),
            n + 1
        )));
    }
    let (x, y) = p.z.split_at(n);
    let mut coeffs = Vec::with_capacity(n + 1);
    coeffs.push(y[0].clone());
    coeffs.extend(x.iter().cloned());
    let poly = IPoly::new(coeffs);
    let height = p
        .z
        .iter()
        .map(|c| c.abs())
        .max()
        .expect("nonempty coefficient vector");
    if height != p.norm {
        return Err(Error::Internal(
            "polynomial height disagrees with the chain norm".into(),
        ));
    }
    Ok(BestPolynomial {
        k: p.k,
        poly,
        height,
        value: p.err.clone(),
    })
}

/// Compute the first `count` best approximation polynomials for theta at
/// degree n.
pub fn best_polynomials(
    theta: &RealSpec,
    n: usize,
    count: usize,
    cfg: &EngineConfig,
) -> Result<PolynomialChain> {
    let system = veronese_system(theta, n)?;
    let chain = minimal_point_sequence(&system, &SequenceRequest::with_count(count), cfg)?;
    let polys = chain
        .points
        .iter()
        .map(|p| to_polynomial(p, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(PolynomialChain {
        n,
        polys,
        points: chain.points,
        complete: chain.complete,
    })
}

/// Exact coprimality over the rationals.
pub fn coprime(p: &BestPolynomial, q: &BestPolynomial) -> bool {
    coprime_over_q(&p.poly, &q.poly)
}

fn poly_at<'a>(polys: &'a [BestPolynomial], k: usize) -> Result<&'a BestPolynomial> {
    polys
        .iter()
        .find(|p| p.k == k)
        .ok_or_else(|| Error::DegenerateWindow(format!("chain has no polynomial at index {k}")))
}

/// Fixed-width coefficient vector, low degree first, padded with zeros.
fn coefficient_vector(p: &IPoly, dim: usize) -> Result<Vec<BigInt>> {
    if p.coeffs().len() > dim {
        return Err(Error::ShapeMismatch(format!(
            "degree-{} polynomial does not fit in dimension {dim}",
            p.degree()
        )));
    }
    let mut v = p.coeffs().to_vec();
    v.resize(dim, BigInt::zero());
    Ok(v)
}

fn require_one_form(stats: &ApproximationStats) -> Result<()> {
    if stats.m != 1 {
        return Err(Error::InvalidSpec(
            "polynomial criteria need one-form statistics".into(),
        ));
    }
    Ok(())
}

fn indexed<'a>(
    stats: &'a ApproximationStats,
    pick: impl Fn(&'a ApproximationStats, usize) -> Option<&'a Interval>,
    k: usize,
    what: &str,
) -> Result<&'a Interval> {
    pick(stats, k).ok_or_else(|| Error::DegenerateWindow(format!("window has no {what} at index {k}")))
}

// ---------------------------------------------------------------------------
// Height gap bound.

/// The proven floor on one norm-growth quotient: for coprime consecutive
/// polynomials with nu_k > 2n - 1, tau_k >= (nu_k - n + 1)/n - eps.
#[derive(Clone, Debug)]
pub struct GapBoundReport {
    pub k: usize,
    pub nu_k: Interval,
    pub tau_k: Interval,
    /// (nu_k - n + 1)/n - eps.
    pub required: Interval,
    /// tau_k minus the requirement; nonnegative when the bound holds.
    pub margin: Interval,
    pub verdict: Verdict,
}

/// Check the height gap bound at index k.  The bound carries an implied
/// constant that epsilon only absorbs once heights are large, so small
/// indices can legitimately show a negative margin; violations are
/// reported as data, with the judgment left to the caller.
pub fn gap_bound_check(
    polys: &[BestPolynomial],
    stats: &ApproximationStats,
    k: usize,
    eps: &Rat,
) -> Result<GapBoundReport> {
    require_one_form(stats)?;
    if !eps.is_positive() {
        return Err(Error::InvalidSpec("epsilon must be positive".into()));
    }
    let n = stats.n;
    let p = poly_at(polys, k)?;
    let q = poly_at(polys, k + 1)?;
    if !coprime(p, q) {
        return Err(Error::HypothesisNotMet(format!(
            "polynomials at {k} and {} share a factor",
            k + 1
        )));
    }
    let nu_k = indexed(stats, |s, k| s.nu_at(k), k, "nu")?.clone();
    let floor = Rat::from_integer(BigInt::from(2 * n as i64 - 1));
    if nu_k.hi <= floor {
        return Err(Error::HypothesisNotMet(format!(
            "approximation quality at {k} certifiably at most {}",
            2 * n - 1
        )));
    }
    if nu_k.lo <= floor {
        return Err(Error::HypothesisNotMet(format!(
            "approximation quality at {k} not certifiably above {}",
            2 * n - 1
        )));
    }
    let tau_k = indexed(stats, |s, k| s.tau_at(k), k, "tau")?.clone();
    let shift = Rat::from_integer(BigInt::from(n as i64 - 1));
    let scale = Rat::new(BigInt::one(), BigInt::from(n as i64));
    let required = nu_k
        .sub(&Interval::point(shift))
        .scale(&scale)
        .sub(&Interval::point(eps.clone()));
    let margin = tau_k.sub(&required);
    let verdict = stats::judge(&required, &tau_k);
    Ok(GapBoundReport {
        k,
        nu_k,
        tau_k,
        required,
        margin,
        verdict,
    })
}

#[derive(Clone, Debug, Default)]
pub struct GapBoundAudit {
    pub reports: Vec<GapBoundReport>,
    /// Indices whose hypotheses did not certify, with reasons.
    pub skipped: Vec<String>,
}

/// Check the gap bound at every window index whose hypotheses certify.
pub fn gap_bound_audit(
    polys: &[BestPolynomial],
    stats: &ApproximationStats,
    eps: &Rat,
) -> Result<GapBoundAudit> {
    let mut out = GapBoundAudit::default();
    if stats.k_max < 1 {
        return Ok(out);
    }
    for k in stats.k0..=stats.k_max - 1 {
        match gap_bound_check(polys, stats, k, eps) {
            Ok(r) => out.reports.push(r),
            Err(Error::HypothesisNotMet(msg)) => out.skipped.push(format!("k={k}: {msg}")),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Window criterion from the classical exponent estimates.

/// Worst rank over all length-ell runs of coefficient vectors in the
/// window, recorded into the verdict; fired-but-dependent runs make the
/// verdict unsound.
fn audit_poly_runs(
    polys: &[BestPolynomial],
    stats: &ApproximationStats,
    verdict: &mut CriterionVerdict,
    ell: usize,
    dim: usize,
) -> Result<()> {
    if stats.k_max + 1 < ell {
        return Ok(());
    }
    let mut worst: Option<usize> = None;
    for k in stats.k0..=stats.k_max + 1 - ell {
        let mut rows = Vec::with_capacity(ell);
        for j in k..k + ell {
            rows.push(coefficient_vector(&poly_at(polys, j)?.poly, dim)?);
        }
        let rank = IntMat::from_rows(rows)?.exact_rank();
        worst = Some(worst.map_or(rank, |w| w.min(rank)));
    }
    if let Some(w) = worst {
        verdict.record_rank(w);
    }
    Ok(())
}

/// Certify coprimality of every consecutive pair in the window, either
/// exactly or through a supplied upper bound for the degree-(n-1)
/// exponent (coprimality holds once that exponent sits below the window
/// minimum of nu).  Returns a note describing the certification route.
fn certify_window_coprime(
    polys: &[BestPolynomial],
    stats: &ApproximationStats,
    w_nm1: Option<&Rat>,
) -> Result<String> {
    let mut bad = None;
    for k in stats.k0..stats.k_max {
        let p = poly_at(polys, k)?;
        let q = poly_at(polys, k + 1)?;
        if !coprime(p, q) {
            bad = Some(k);
            break;
        }
    }
    match bad {
        None => Ok("coprimality checked exactly on every consecutive pair".into()),
        Some(k) => {
            if let Some(w) = w_nm1 {
                if w < &stats.nu_lower.lo {
                    return Ok(format!(
                        "pair at {k} shares a factor; coprimality taken from the \
                         supplied degree-{} exponent bound {w} below the window quality",
                        stats.n - 1
                    ));
                }
            }
            Err(Error::HypothesisNotCertifiable(format!(
                "polynomials at {k} and {} share a factor",
                k + 1
            )))
        }
    }
}

/// Window length bound from the classical exponent estimates: with
/// nu_lower > 2n - 1 and coprime consecutive polynomials, runs of
/// ell < log((nu_lower - 2n + 1)(w - what)/n + 1)/log(w/what) + 1
/// consecutive polynomials are independent for large k.  Also derives
/// the error-decay floor implied by the gap bound, whose certified
/// violation fails the run.
pub fn criterion_cc(
    polys: &[BestPolynomial],
    stats: &ApproximationStats,
    ell: usize,
    eps: &Rat,
    w_nm1: Option<&Rat>,
) -> Result<CriterionVerdict> {
    require_one_form(stats)?;
    if ell < 2 {
        return Err(Error::InvalidSpec("run length must be at least 2".into()));
    }
    let n = stats.n;
    let coprime_note = certify_window_coprime(polys, stats, w_nm1)?;
    let nu = &stats.nu_lower;
    let floor = Rat::from_integer(BigInt::from(2 * n as i64 - 1));
    if nu.lo <= floor {
        return Err(Error::HypothesisNotCertifiable(format!(
            "window approximation quality not certifiably above {}",
            2 * n - 1
        )));
    }

    // Derived error-decay floor: sigma_lower >= (nu_lower - n + 1)/n,
    // with the epsilon slack of the underlying asymptotic bound.
    let shift = Rat::from_integer(BigInt::from(n as i64 - 1));
    let scale = Rat::new(BigInt::one(), BigInt::from(n as i64));
    let sigma_floor = nu
        .sub(&Interval::point(shift))
        .scale(&scale)
        .sub(&Interval::point(eps.clone()));
    if stats::judge(&sigma_floor, &stats.sigma_lower) == Verdict::ViolatedAtFiniteHorizon {
        return Err(Error::Internal(
            "derived error-decay floor certifiably violated on window data".into(),
        ));
    }

    let w = &stats.w_est;
    let what = &stats.what_lower;
    if what.contains_zero() {
        return Err(Error::HypothesisNotCertifiable(
            "uniform estimate not separated from zero".into(),
        ));
    }
    let base = w.div(what)?;
    if base.lo <= Rat::one() {
        return Err(Error::HypothesisNotCertifiable(
            "exponent ratio not certifiably above 1".into(),
        ));
    }
    let cap_note = match stats::judge(&stats.tau_upper, &base) {
        Verdict::Satisfied => String::new(),
        v => format!("; norm-growth cap against the exponent ratio: {v}"),
    };

    let inner = nu
        .sub(&Interval::point(floor))
        .mul(&w.sub(what))
        .scale(&scale)
        .add(&Interval::from_int(1));
    let mut v = if inner.lo.is_positive() {
        let rhs = ln_interval(&inner, LOG_BITS)?
            .div(&ln_interval(&base, LOG_BITS)?)?
            .add(&Interval::from_int(1));
        let fired = fired_when_index_below(ell, &rhs);
        CriterionVerdict::new(CriterionId::Cc, stats.k0, ell, fired).with("threshold", rhs)
    } else {
        CriterionVerdict::new(CriterionId::Cc, stats.k0, ell, Fired::Inconclusive)
    };
    v = v
        .with("quality_window_min", nu.clone())
        .with("ordinary_estimate", w.clone())
        .with("uniform_estimate", what.clone())
        .noted(&format!("{coprime_note}{cap_note}"));
    audit_poly_runs(polys, stats, &mut v, ell, n + 1)?;
    Ok(v)
}

// ---------------------------------------------------------------------------
// Triple criterion with the gap-bound substitution.

/// The two alternative conditions on consecutive polynomials; either one
/// firing predicts independence of P_k, P_{k+1}, P_{k+2}.
#[derive(Clone, Debug)]
pub struct PolyTripleVerdict {
    pub quad: CriterionVerdict,
    pub ratio: CriterionVerdict,
}

impl PolyTripleVerdict {
    pub fn any_fired(&self) -> Fired {
        if self.quad.fired == Fired::Yes || self.ratio.fired == Fired::Yes {
            Fired::Yes
        } else if self.quad.fired == Fired::No && self.ratio.fired == Fired::No {
            Fired::No
        } else {
            Fired::Inconclusive
        }
    }
}

/// Evaluate, with chi_k = (nu_k - n + 1)/n substituted for the norm
/// growth:
///   (chi_k^2 nu_{k+1} - chi_k nu_k) w^2 - nu_k w - chi_k nu_k nu_{k+1} > 0,
///   (nu_{k+1} - tau_{k+1})(nu_k - n + 1)/nu_k > n.
/// The first needs its leading bracket certifiably positive for a firing
/// at a lower surrogate to transfer upward; otherwise a raw Yes demotes
/// to inconclusive.
pub fn criterion_36(
    polys: &[BestPolynomial],
    stats: &ApproximationStats,
    k: usize,
    what: &Interval,
) -> Result<PolyTripleVerdict> {
    require_one_form(stats)?;
    let n = stats.n;
    if n < 2 {
        return Err(Error::InvalidSpec(
            "the polynomial triple criterion needs degree at least 2".into(),
        ));
    }
    let p = poly_at(polys, k)?;
    let q = poly_at(polys, k + 1)?;
    if !coprime(p, q) {
        return Err(Error::HypothesisNotMet(format!(
            "polynomials at {k} and {} share a factor",
            k + 1
        )));
    }
    let nu_k = indexed(stats, |s, k| s.nu_at(k), k, "nu")?.clone();
    let floor = Rat::from_integer(BigInt::from(2 * n as i64 - 1));
    if nu_k.hi <= floor {
        return Err(Error::HypothesisNotMet(format!(
            "approximation quality at {k} certifiably at most {}",
            2 * n - 1
        )));
    }
    if nu_k.lo <= floor {
        return Err(Error::HypothesisNotMet(format!(
            "approximation quality at {k} not certifiably above {}",
            2 * n - 1
        )));
    }
    let nu_next = indexed(stats, |s, k| s.nu_at(k), k + 1, "nu")?.clone();
    let tau_next = indexed(stats, |s, k| s.tau_at(k), k + 1, "tau")?.clone();

    let shift = Rat::from_integer(BigInt::from(n as i64 - 1));
    let scale = Rat::new(BigInt::one(), BigInt::from(n as i64));
    let chi = nu_k.sub(&Interval::point(shift)).scale(&scale);

    let bracket = chi.mul(&nu_next).sub(&nu_k);
    let expr = chi
        .mul(&bracket)
        .mul(&what.square())
        .sub(&nu_k.mul(what))
        .sub(&chi.mul(&nu_k).mul(&nu_next));
    let mut fired = fired_when_above(&expr, &Interval::zero());
    let mut note = String::new();
    if fired == Fired::Yes && !bracket.lo.is_positive() {
        // Without an upward parabola the firing set need not be a ray,
        // so a surrogate firing says nothing about the true exponent.
        fired = Fired::Inconclusive;
        note = "leading bracket not certifiably positive; firing does not transfer".into();
    }
    let mut quad = CriterionVerdict::new(CriterionId::Quad36, k, 3, fired)
        .with("uniform_lower", what.clone())
        .with("lhs", expr)
        .with("bracket", bracket)
        .noted(&note);

    let mut ratio = if nu_k.contains_zero() {
        CriterionVerdict::new(CriterionId::Ratio36, k, 3, Fired::Inconclusive)
            .noted("approximation quality not separated from zero")
    } else {
        let lhs = nu_next
            .sub(&tau_next)
            .mul(&nu_k.sub(&Interval::point(Rat::from_integer(BigInt::from(
                n as i64 - 1,
            )))))
            .div(&nu_k)?;
        let rhs = Interval::from_int(n as i64);
        CriterionVerdict::new(CriterionId::Ratio36, k, 3, fired_when_above(&lhs, &rhs))
            .with("lhs", lhs)
            .with("threshold", rhs)
    };

    let dim = n + 1;
    let mut rows = Vec::with_capacity(3);
    for j in k..k + 3 {
        rows.push(coefficient_vector(&poly_at(polys, j)?.poly, dim)?);
    }
    let rank = IntMat::from_rows(rows)?.exact_rank();
    quad.record_rank(rank);
    ratio.record_rank(rank);
    Ok(PolyTripleVerdict { quad, ratio })
}

// ---------------------------------------------------------------------------
// Shifted-family criterion.

/// Coefficient vectors of T^i P_j for i = 0..=d and j = k..k+ell-1, in
/// dimension n + d + 1.
fn shifted_family(
    polys: &[BestPolynomial],
    k: usize,
    ell: usize,
    d: usize,
    dim: usize,
) -> Result<Vec<Vec<BigInt>>> {
    let mut rows = Vec::with_capacity((d + 1) * ell);
    for j in k..k + ell {
        let p = poly_at(polys, j)?;
        for i in 0..=d {
            rows.push(coefficient_vector(&p.poly.shift_up(i), dim)?);
        }
    }
    Ok(rows)
}

/// Shifted-family criterion: fires when the uniform surrogate exceeds
/// ((d+1) ell - 1)(w_d + 1) tau_upper^(ell-1) / (sigma_lower - 1),
/// predicting independence of the (d+1) ell polynomials T^i P_j over any
/// ell consecutive indices, inside degree n + d.  The degree-d exponent
/// bound w_d is exact 0 at d = 0 and user-supplied above, which makes
/// the verdict conditional on it.
pub fn criterion_konse(
    polys: &[BestPolynomial],
    stats: &ApproximationStats,
    d: usize,
    ell: usize,
    w_d: Option<&Rat>,
    what: &Interval,
) -> Result<CriterionVerdict> {
    require_one_form(stats)?;
    if ell < 3 {
        return Err(Error::InvalidSpec("run length must be at least 3".into()));
    }
    let n = stats.n;
    let family = (d + 1) * ell;
    if family > n + d + 1 {
        return Err(Error::DimensionViolation(format!(
            "family of {family} shifted polynomials cannot be independent in dimension {}",
            n + d + 1
        )));
    }
    let wd = match (d, w_d) {
        (0, None) => Rat::zero(),
        (0, Some(v)) if v.is_zero() => Rat::zero(),
        (0, Some(_)) => {
            return Err(Error::InvalidSpec(
                "the degree-0 exponent is exactly 0".into(),
            ))
        }
        (_, Some(v)) if !v.is_negative() => v.clone(),
        (_, Some(_)) => {
            return Err(Error::InvalidSpec("exponent bound must be nonnegative".into()))
        }
        (_, None) => {
            return Err(Error::InvalidSpec(format!(
                "a degree-{d} exponent upper bound is required"
            )))
        }
    };
    let sig = &stats.sigma_lower;
    let denom = sig.sub(&Interval::from_int(1));
    if !denom.lo.is_positive() {
        return Err(Error::HypothesisNotCertifiable(
            "window minimum of the error-decay quotient not certifiably above 1".into(),
        ));
    }
    let tau_pow = stats.tau_upper.pow_u32((ell - 1) as u32);
    let lead = Rat::from_integer(BigInt::from(family as i64 - 1)) * (&wd + Rat::one());
    let rhs = tau_pow.scale(&lead).div(&denom)?;
    let fired = fired_when_above(what, &rhs);

    if d == 0 {
        // The d = 0 threshold is the simplified run criterion with the
        // norm-growth product replaced by tau_upper^(ell-1): check the
        // rearranged length form agrees.
        let len_rhs = what
            .mul(&denom)
            .div(&stats.tau_upper.pow_u32((ell - 1) as u32))?
            .add(&Interval::from_int(1));
        let alt = fired_when_index_below(ell, &len_rhs);
        if contradicts(fired, alt) {
            return Err(Error::Internal(format!(
                "shifted-family criterion at d=0 disagrees with its run form: {fired} vs {alt}"
            )));
        }
    }

    let mut note = String::new();
    if d >= 1 {
        note = format!("conditional on the supplied degree-{d} exponent upper bound {wd}");
    }
    let mut v = CriterionVerdict::new(CriterionId::Konse, stats.k0, family, fired)
        .with("uniform_lower", what.clone())
        .with("threshold", rhs)
        .with("sigma_window_min", sig.clone())
        .with("tau_window_max", stats.tau_upper.clone())
        .noted(&note);

    // Worst exact rank of the shifted family over all window run starts.
    if stats.k_max + 1 >= ell {
        let dim = n + d + 1;
        let mut worst: Option<usize> = None;
        for k in stats.k0..=stats.k_max + 1 - ell {
            let rows = shifted_family(polys, k, ell, d, dim)?;
            let rank = IntMat::from_rows(rows)?.exact_rank();
            worst = Some(worst.map_or(rank, |w| w.min(rank)));
        }
        if let Some(w) = worst {
            v.record_rank(w);
        }
    }
    Ok(v)
}
