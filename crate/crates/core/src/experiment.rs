//! Config-driven experiment pipeline.
//!
//! One TOML document describes a run end to end: the coefficient matrix
//! (explicit entries or a named generator with its seed), the chain
//! budget, the precision schedule, and which criteria to evaluate.  The
//! pipeline computes the chain, derives exponent statistics, audits the
//! inequalities and criteria, and writes every artifact into the output
//! directory.
//!
//! Rerunning the same config reproduces every artifact byte for byte.
//! The only volatile output is `timings.txt`, which is excluded from
//! that guarantee on purpose; `report.json` carries no clocks.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Deserialize;
use serde_json::json;

use crate::criteria::{soundness_audit, AuditConfig, CriterionId, SoundnessReport};
use crate::error::{Error, Result};
use crate::generate::{generate_theta, ThetaKind, RNG_ALGORITHM};
use crate::interval::{parse_decimal, Rat};
use crate::io;
use crate::minimal::{
    minimal_point_sequence, EngineConfig, MinimalChain, MinimalPoint, SequenceRequest, ThetaMatrix,
};
use crate::parallel::par_try_map;
use crate::plot::emit_plots;
use crate::realspec::RealSpec;
use crate::stats::{audit_inequalities, compute_stats, ApproximationStats, StatsRequest};
use crate::veronese;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaSection {
    /// `explicit`, `random_uniform`, `algebraic`, `extremal_cf`, or
    /// `quadratic_grid`.
    pub kind: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub digits: Option<u32>,
    #[serde(default)]
    pub index: Option<u32>,
    /// Row-major entry specs for the explicit and algebraic kinds.
    #[serde(default)]
    pub entries: Vec<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrecisionSection {
    #[serde(default = "default_start_bits")]
    pub start_bits: u32,
    #[serde(default = "default_cap_bits")]
    pub cap_bits: u32,
    /// Working precision of the logarithm enclosures in the statistics.
    #[serde(default = "default_stats_bits")]
    pub stats_bits: u32,
}

fn default_start_bits() -> u32 {
    64
}
fn default_cap_bits() -> u32 {
    4096
}
fn default_stats_bits() -> u32 {
    128
}

impl Default for PrecisionSection {
    fn default() -> Self {
        PrecisionSection {
            start_bits: default_start_bits(),
            cap_bits: default_cap_bits(),
            stats_bits: default_stats_bits(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriteriaSection {
    /// Theorem families to report: any of `spez`, `starkaug`, `konk`,
    /// `rr`, `fehl`, `202`.
    #[serde(default = "default_theorems")]
    pub theorems: Vec<String>,
    #[serde(default = "default_k0")]
    pub k0: usize,
    /// Slack, as a decimal or `p/q` string.
    #[serde(default = "default_epsilon")]
    pub epsilon: String,
    #[serde(default = "default_min_depth")]
    pub min_depth: usize,
    /// Use the dimension ratio n/m instead of the window minimum as the
    /// uniform-exponent surrogate.
    #[serde(default)]
    pub use_dim_ratio: bool,
}

fn default_theorems() -> Vec<String> {
    ["spez", "starkaug", "konk", "rr", "fehl", "202"]
        .into_iter()
        .map(String::from)
        .collect()
}
fn default_k0() -> usize {
    5
}
fn default_epsilon() -> String {
    "1/20".into()
}
fn default_min_depth() -> usize {
    4
}

impl Default for CriteriaSection {
    fn default() -> Self {
        CriteriaSection {
            theorems: default_theorems(),
            k0: default_k0(),
            epsilon: default_epsilon(),
            min_depth: default_min_depth(),
            use_dim_ratio: false,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VeroneseSection {
    /// Base value; defaults to the first matrix entry.
    #[serde(default)]
    pub base: Option<String>,
    /// Any of `cc`, `36`, `konse`.
    #[serde(default)]
    pub criteria: Vec<String>,
    /// Shift order for the `konse` family.
    #[serde(default)]
    pub d: usize,
    /// Run length for `cc` and `konse`.
    #[serde(default = "default_ell")]
    pub ell: usize,
    /// Certified upper bound used by the coprimality bypass (`cc`) and
    /// the shifted family (`konse` with d >= 1), as a rational string.
    #[serde(default)]
    pub w_bound: Option<String>,
}

fn default_ell() -> usize {
    3
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Names the run; used as the artifact file prefix.
    pub label: String,
    /// Number of forms.
    pub m: usize,
    /// Number of variables.
    pub n: usize,
    /// How many chain points to compute.
    pub depth: usize,
    /// Optional height ceiling, a decimal integer string.
    #[serde(default)]
    pub max_norm: Option<String>,
    /// Output directory.
    pub out: String,
    pub theta: ThetaSection,
    #[serde(default)]
    pub precision: PrecisionSection,
    #[serde(default)]
    pub criteria: CriteriaSection,
    #[serde(default)]
    pub veronese: Option<VeroneseSection>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)
            .map_err(|e| Error::InvalidSpec(format!("config rejected: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.label.is_empty()
            || !self
                .label
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return Err(Error::InvalidSpec(
                "label must be nonempty and use only letters, digits, '-', '_'".into(),
            ));
        }
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidSpec("m and n must be positive".into()));
        }
        if self.depth == 0 {
            return Err(Error::InvalidSpec("depth must be positive".into()));
        }
        if self.out.is_empty() {
            return Err(Error::InvalidSpec("output directory must be set".into()));
        }
        if self.precision.start_bits == 0 || self.precision.cap_bits < self.precision.start_bits {
            return Err(Error::InvalidSpec(
                "precision schedule needs 0 < start_bits <= cap_bits".into(),
            ));
        }
        if let Some(mn) = &self.max_norm {
            let v = BigInt::from_str(mn)
                .map_err(|e| Error::InvalidSpec(format!("bad max_norm '{mn}': {e}")))?;
            if v < BigInt::from(1) {
                return Err(Error::InvalidSpec("max_norm must be at least 1".into()));
            }
        }
        self.epsilon()?;
        self.theta_kind()?;
        theorem_families(&self.criteria.theorems)?;
        if let Some(v) = &self.veronese {
            for c in &v.criteria {
                if !matches!(c.as_str(), "cc" | "36" | "konse") {
                    return Err(Error::InvalidSpec(format!(
                        "unknown polynomial criterion '{c}'; expected cc, 36, or konse"
                    )));
                }
            }
            if let Some(w) = &v.w_bound {
                parse_rat_text(w)?;
            }
        }
        Ok(())
    }

    pub fn epsilon(&self) -> Result<Rat> {
        let eps = parse_rat_text(&self.criteria.epsilon)?;
        if eps <= Rat::zero() {
            return Err(Error::InvalidSpec("epsilon must be positive".into()));
        }
        Ok(eps)
    }

    pub fn theta_kind(&self) -> Result<ThetaKind> {
        match self.theta.kind.as_str() {
            "random_uniform" => {
                let seed = self.theta.seed.ok_or_else(|| {
                    Error::InvalidSpec("random_uniform needs a seed".into())
                })?;
                let digits = self.theta.digits.ok_or_else(|| {
                    Error::InvalidSpec("random_uniform needs a digit budget".into())
                })?;
                Ok(ThetaKind::RandomUniform { seed, digits })
            }
            "explicit" | "algebraic" => {
                if self.theta.entries.is_empty() {
                    return Err(Error::InvalidSpec(format!(
                        "kind '{}' needs entry specs",
                        self.theta.kind
                    )));
                }
                let entries = self
                    .theta
                    .entries
                    .iter()
                    .map(|s| RealSpec::parse(s))
                    .collect::<Result<Vec<_>>>()?;
                Ok(ThetaKind::Algebraic { entries })
            }
            "extremal_cf" => Ok(ThetaKind::ExtremalCf),
            "quadratic_grid" => Ok(ThetaKind::QuadraticGrid {
                index: self.theta.index.unwrap_or(0),
            }),
            other => Err(Error::InvalidSpec(format!(
                "unknown matrix kind '{other}'; expected explicit, random_uniform, algebraic, extremal_cf, or quadratic_grid"
            ))),
        }
    }

    fn engine(&self) -> EngineConfig {
        EngineConfig {
            precision_start: self.precision.start_bits,
            precision_cap: self.precision.cap_bits,
            ..EngineConfig::default()
        }
    }
}

fn parse_rat_text(s: &str) -> Result<Rat> {
    if let Some(v) = parse_decimal(s) {
        return Ok(v);
    }
    Rat::from_str(s).map_err(|e| Error::InvalidSpec(format!("bad rational '{s}': {e}")))
}

/// Expand theorem family tokens into the criterion identifiers they
/// cover.
pub fn theorem_families(tokens: &[String]) -> Result<Vec<CriterionId>> {
    let mut out = Vec::new();
    for t in tokens {
        match t.as_str() {
            "spez" => out.push(CriterionId::Spez),
            "starkaug" => out.push(CriterionId::Starkaug),
            "konk" => out.push(CriterionId::Konk),
            "rr" => out.push(CriterionId::Rr),
            "fehl" => out.extend([CriterionId::FehlSusdortn, CriterionId::FehlSushier]),
            "202" => out.extend([CriterionId::Nr1, CriterionId::Nr3, CriterionId::Nr2]),
            other => {
                return Err(Error::InvalidSpec(format!(
                    "unknown theorem family '{other}'; expected spez, starkaug, konk, rr, fehl, or 202"
                )))
            }
        }
    }
    Ok(out)
}

/// Restrict an audit to the requested criterion identifiers.
pub fn filter_report(rep: &SoundnessReport, ids: &[CriterionId]) -> SoundnessReport {
    SoundnessReport {
        verdicts: rep
            .verdicts
            .iter()
            .filter(|v| ids.contains(&v.id))
            .cloned()
            .collect(),
        skipped: rep.skipped.clone(),
        incidents: rep
            .incidents
            .iter()
            .filter(|i| ids.contains(&i.verdict.id))
            .cloned()
            .collect(),
    }
}

/// Stable summary of one finished run.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub label: String,
    pub out_dir: PathBuf,
    /// File names under `out_dir`, sorted.
    pub artifacts: Vec<String>,
    pub points: usize,
    pub complete: bool,
    pub verdicts: usize,
    pub fired: usize,
    pub incidents: usize,
    pub skipped: usize,
    /// Wall clock; recorded in `timings.txt`, never in `report.json`.
    pub wall_ms: u128,
}

/// Widest statistics window a chain supports: it must start past any
/// height-1 point (log ratios need norms above 1) and stop before an
/// exact-zero error (which has no logarithm).
pub fn stats_window(points: &[MinimalPoint]) -> Option<(usize, usize)> {
    let usable = points
        .iter()
        .take_while(|p| p.err.hi > Rat::zero())
        .count();
    let k0 = points.iter().position(|p| p.norm > BigInt::from(1))? + 1;
    if usable < k0 + 2 {
        return None;
    }
    Some((k0, usable))
}

fn chain_stats(
    cfg: &ExperimentConfig,
    chain: &MinimalChain,
) -> Result<Option<ApproximationStats>> {
    let Some((k0, usable)) = stats_window(&chain.points) else {
        return Ok(None);
    };
    let mut req = StatsRequest::window(k0, usable);
    req.bits = cfg.precision.stats_bits;
    Ok(Some(compute_stats(
        &chain.points[..usable],
        cfg.m,
        cfg.n,
        &req,
    )?))
}

fn poly_json(polys: &[veronese::BestPolynomial]) -> Vec<serde_json::Value> {
    polys
        .iter()
        .map(|p| {
            json!({
                "coeffs": p.poly.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "height": p.height.to_string(),
                "k": p.k,
            })
        })
        .collect()
}

/// One polynomial-chain analysis request: compute the chain for `base`
/// at degree `degree`, audit the gap bound, and evaluate the selected
/// polynomial criteria.
#[derive(Clone, Debug)]
pub struct PolynomialRun {
    pub base: RealSpec,
    pub degree: usize,
    pub count: usize,
    /// Any of `cc`, `36`, `konse`; the gap audit always runs.
    pub criteria: Vec<String>,
    /// Shift order for `konse`.
    pub d: usize,
    /// Run length for `cc` (>= 2) and `konse` (>= 3).
    pub ell: usize,
    pub w_bound: Option<Rat>,
    pub epsilon: Rat,
    /// Audits start here; below it the finite-height slack the theorems
    /// absorb asymptotically has not died off yet.
    pub k0: usize,
    pub use_dim_ratio: bool,
    pub stats_bits: u32,
    pub engine: EngineConfig,
}

#[derive(Clone, Debug)]
pub struct PolynomialOutcome {
    /// Full analysis document (the `veronese.json` content).
    pub doc: serde_json::Value,
    pub verdicts: usize,
    pub fired: usize,
    /// Criterion firings contradicted by the exact rank audit.
    pub unsound: usize,
}

pub fn polynomial_analysis(run: &PolynomialRun) -> Result<PolynomialOutcome> {
    if run.epsilon <= Rat::zero() {
        return Err(Error::InvalidSpec("epsilon must be positive".into()));
    }
    let polys = veronese::best_polynomials(&run.base, run.degree, run.count, &run.engine)?;
    let k0 = match stats_window(&polys.points) {
        Some((nat_k0, usable)) if usable >= nat_k0.max(run.k0) + 2 => nat_k0.max(run.k0),
        _ => {
            let doc = json!({
                "base": run.base.to_string(),
                "degree": run.degree,
                "polynomials": poly_json(&polys.polys),
                "skipped": [format!(
                    "chain of {} polynomials too short to audit past index {}",
                    polys.polys.len(),
                    run.k0
                )],
            });
            return Ok(PolynomialOutcome {
                doc,
                verdicts: 0,
                fired: 0,
                unsound: 0,
            });
        }
    };
    let usable = stats_window(&polys.points).expect("checked above").1;
    let mut req = StatsRequest::window(k0, usable);
    req.bits = run.stats_bits;
    let stats = compute_stats(&polys.points[..usable], 1, run.degree, &req)?;
    let what = stats.uniform_surrogate(run.use_dim_ratio);

    let gap = veronese::gap_bound_audit(&polys.polys, &stats, &run.epsilon)?;
    let mut verdicts = Vec::new();
    let mut skipped: Vec<String> = gap.skipped.clone();
    for c in &run.criteria {
        match c.as_str() {
            "cc" => match veronese::criterion_cc(
                &polys.polys,
                &stats,
                run.ell,
                &run.epsilon,
                run.w_bound.as_ref(),
            ) {
                Ok(v) => verdicts.push(v),
                Err(Error::Internal(msg)) => return Err(Error::Internal(msg)),
                Err(e) => skipped.push(format!("cc: {e}")),
            },
            "36" => {
                for k in stats.k0..stats.k_max.saturating_sub(1) {
                    match veronese::criterion_36(&polys.polys, &stats, k, &what) {
                        Ok(v) => {
                            verdicts.push(v.quad);
                            verdicts.push(v.ratio);
                        }
                        Err(Error::Internal(msg)) => return Err(Error::Internal(msg)),
                        Err(e) => skipped.push(format!("36 at k={k}: {e}")),
                    }
                }
            }
            "konse" => match veronese::criterion_konse(
                &polys.polys,
                &stats,
                run.d,
                run.ell.max(3),
                run.w_bound.as_ref(),
                &what,
            ) {
                Ok(v) => verdicts.push(v),
                Err(Error::Internal(msg)) => return Err(Error::Internal(msg)),
                Err(e) => skipped.push(format!("konse: {e}")),
            },
            other => {
                return Err(Error::InvalidSpec(format!(
                    "unknown polynomial criterion '{other}'"
                )))
            }
        }
    }

    let unsound = verdicts.iter().filter(|v| v.sound == Some(false)).count();
    let fired = verdicts
        .iter()
        .filter(|v| v.fired == crate::criteria::Fired::Yes)
        .count();
    let gap_json: Vec<_> = gap
        .reports
        .iter()
        .map(|r| {
            json!({
                "k": r.k,
                "margin": io::interval_json(&r.margin),
                "nu_k": io::interval_json(&r.nu_k),
                "required": io::interval_json(&r.required),
                "tau_k": io::interval_json(&r.tau_k),
                "verdict": r.verdict.to_string(),
            })
        })
        .collect();
    let doc = json!({
        "base": run.base.to_string(),
        "degree": run.degree,
        "gap_bound": gap_json,
        "polynomials": poly_json(&polys.polys),
        "skipped": skipped,
        "verdicts": verdicts.iter().map(io::verdict_json).collect::<Vec<_>>(),
    });
    Ok(PolynomialOutcome {
        doc,
        verdicts: verdicts.len(),
        fired,
        unsound,
    })
}

fn veronese_artifacts(
    cfg: &ExperimentConfig,
    vc: &VeroneseSection,
    theta: &ThetaMatrix,
    out_dir: &Path,
) -> Result<(Vec<String>, usize, usize, usize)> {
    if cfg.m != 1 {
        return Err(Error::InvalidSpec(
            "polynomial analysis needs a single form (m = 1)".into(),
        ));
    }
    let base = match &vc.base {
        Some(text) => RealSpec::parse(text)?,
        None => theta.entry(0, 0).clone(),
    };
    let run = PolynomialRun {
        base,
        degree: cfg.n,
        count: cfg.depth,
        criteria: vc.criteria.clone(),
        d: vc.d,
        ell: vc.ell,
        w_bound: vc.w_bound.as_deref().map(parse_rat_text).transpose()?,
        epsilon: cfg.epsilon()?,
        k0: cfg.criteria.k0,
        use_dim_ratio: cfg.criteria.use_dim_ratio,
        stats_bits: cfg.precision.stats_bits,
        engine: cfg.engine(),
    };
    let outcome = polynomial_analysis(&run)?;
    io::write_json(&out_dir.join("veronese.json"), &outcome.doc)?;
    Ok((
        vec!["veronese.json".into()],
        outcome.verdicts,
        outcome.fired,
        outcome.unsound,
    ))
}

/// Run one experiment end to end, writing all artifacts under its
/// output directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let t0 = Instant::now();
    let out_dir = PathBuf::from(&cfg.out);
    fs::create_dir_all(&out_dir)?;

    let kind = cfg.theta_kind()?;
    let theta = generate_theta(&kind, cfg.m, cfg.n)?;
    let mut req = SequenceRequest::with_count(cfg.depth);
    if let Some(mn) = &cfg.max_norm {
        req.max_norm = Some(BigInt::from_str(mn).expect("validated"));
    }
    let chain = minimal_point_sequence(&theta, &req, &cfg.engine())?;
    let entries: Vec<String> = theta.entries().iter().map(|e| e.to_string()).collect();

    let mut artifacts: Vec<String> = Vec::new();
    io::write_sequence(
        &out_dir.join("seq.jsonl"),
        cfg.m,
        cfg.n,
        chain.complete,
        &entries,
        &chain.points,
    )?;
    artifacts.push("seq.jsonl".into());
    fs::write(out_dir.join("seq.csv"), io::sequence_csv(&chain.points, 30))?;
    artifacts.push("seq.csv".into());

    let stats = chain_stats(cfg, &chain)?;
    let mut filtered = SoundnessReport::default();
    if let Some(st) = &stats {
        fs::write(out_dir.join("stats.csv"), io::stats_csv(st, 12))?;
        artifacts.push("stats.csv".into());
        let ineq = audit_inequalities(st, cfg.criteria.min_depth);
        io::write_json(&out_dir.join("inequalities.json"), &io::audit_report_json(&ineq))?;
        artifacts.push("inequalities.json".into());

        let audit_cfg = AuditConfig {
            k0: cfg.criteria.k0,
            epsilon: cfg.epsilon()?,
            min_depth: cfg.criteria.min_depth,
            use_dim_ratio: cfg.criteria.use_dim_ratio,
        };
        let full = soundness_audit(&chain.points, st, &audit_cfg)?;
        filtered = filter_report(&full, &theorem_families(&cfg.criteria.theorems)?);
        io::write_json(&out_dir.join("verdicts.json"), &io::soundness_json(&filtered))?;
        artifacts.push("verdicts.json".into());
    }

    let mut verdict_count = filtered.verdicts.len();
    let mut fired_count = filtered.fired_count();
    let mut incident_count = filtered.incidents.len();
    let skipped_count = filtered.skipped.len();
    if let Some(vc) = &cfg.veronese {
        let (files, v, f, unsound) = veronese_artifacts(cfg, vc, &theta, &out_dir)?;
        artifacts.extend(files);
        verdict_count += v;
        fired_count += f;
        incident_count += unsound;
    }

    for p in emit_plots(
        &out_dir,
        &cfg.label,
        &chain.points,
        stats.as_ref(),
        &filtered.verdicts,
    )? {
        let name = p
            .file_name()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Error::Internal("plot path not valid unicode".into()))?
            .to_string();
        artifacts.push(name);
    }

    artifacts.push("report.json".into());
    artifacts.sort();

    let rng = match kind.seed() {
        Some(seed) => json!({"algorithm": RNG_ALGORITHM, "seed": seed}),
        None => serde_json::Value::Null,
    };
    let report = json!({
        "artifacts": artifacts.clone(),
        "complete": chain.complete,
        "criteria": {
            "epsilon": cfg.criteria.epsilon,
            "k0": cfg.criteria.k0,
            "min_depth": cfg.criteria.min_depth,
            "theorems": cfg.criteria.theorems,
            "use_dim_ratio": cfg.criteria.use_dim_ratio,
        },
        "fired": fired_count,
        "incidents": incident_count,
        "label": cfg.label,
        "points": chain.points.len(),
        "precision": {
            "cap_bits": cfg.precision.cap_bits,
            "start_bits": cfg.precision.start_bits,
            "stats_bits": cfg.precision.stats_bits,
        },
        "rng": rng,
        "shape": {"m": cfg.m, "n": cfg.n},
        "skipped": skipped_count,
        "theta": {"entries": entries, "kind": kind.name()},
        "verdicts": verdict_count,
    });
    io::write_json(&out_dir.join("report.json"), &report)?;

    let wall_ms = t0.elapsed().as_millis();
    fs::write(out_dir.join("timings.txt"), format!("wall_ms {wall_ms}\n"))?;

    Ok(RunReport {
        label: cfg.label.clone(),
        out_dir,
        artifacts,
        points: chain.points.len(),
        complete: chain.complete,
        verdicts: verdict_count,
        fired: fired_count,
        incidents: incident_count,
        skipped: skipped_count,
        wall_ms,
    })
}

/// Run several experiments, fanning out across workers.  Each config
/// must use its own output directory.
pub fn run_experiments(cfgs: Vec<ExperimentConfig>) -> Result<Vec<RunReport>> {
    let mut outs: Vec<&str> = cfgs.iter().map(|c| c.out.as_str()).collect();
    outs.sort_unstable();
    outs.dedup();
    if outs.len() != cfgs.len() {
        return Err(Error::InvalidSpec(
            "experiments must not share output directories".into(),
        ));
    }
    par_try_map(cfgs, |cfg| run_experiment(&cfg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi_toml(out: &Path) -> String {
        format!(
            r#"
label = "phi"
m = 1
n = 1
depth = 16
out = "{}"

[theta]
kind = "explicit"
entries = ["surd:(1+1*sqrt(5))/2"]
"#,
            out.display()
        )
    }

    fn tdir(name: &str) -> PathBuf {
        std::env::temp_dir().join(format!("linform_exp_{name}"))
    }

    #[test]
    fn zero_depth_is_rejected() {
        let dir = tdir("zero_depth");
        let text = phi_toml(&dir).replace("depth = 16", "depth = 0");
        match ExperimentConfig::from_toml(&text) {
            Err(Error::InvalidSpec(msg)) => assert!(msg.contains("depth")),
            other => panic!("expected a validation error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_tokens_are_rejected() {
        let dir = tdir("tokens");
        let bad_kind = phi_toml(&dir).replace("kind = \"explicit\"", "kind = \"surprise\"");
        assert!(ExperimentConfig::from_toml(&bad_kind).is_err());
        let bad_family = format!(
            "{}\n[criteria]\ntheorems = [\"spez\", \"nope\"]\n",
            phi_toml(&dir)
        );
        assert!(ExperimentConfig::from_toml(&bad_family).is_err());
        let bad_field = format!("{}\nunexpected = 1\n", phi_toml(&dir));
        assert!(ExperimentConfig::from_toml(&bad_field).is_err());
    }

    #[test]
    fn reruns_reproduce_artifact_bytes() {
        let dir_a = tdir("repro_a");
        let dir_b = tdir("repro_b");
        for d in [&dir_a, &dir_b] {
            let _ = fs::remove_dir_all(d);
        }
        let rep_a = run_experiment(&ExperimentConfig::from_toml(&phi_toml(&dir_a)).unwrap()).unwrap();
        let rep_b = run_experiment(&ExperimentConfig::from_toml(&phi_toml(&dir_b)).unwrap()).unwrap();
        assert_eq!(rep_a.artifacts, rep_b.artifacts);
        assert!(!rep_a.artifacts.is_empty());
        for name in &rep_a.artifacts {
            let a = fs::read(dir_a.join(name)).unwrap();
            let b = fs::read(dir_b.join(name)).unwrap();
            assert_eq!(a, b, "artifact {name} differs between reruns");
        }
        assert_eq!(rep_a.incidents, 0);
        assert!(rep_a.verdicts > 0);
        for expected in ["seq.jsonl", "seq.csv", "stats.csv", "verdicts.json", "report.json"] {
            assert!(rep_a.artifacts.iter().any(|a| a == expected), "missing {expected}");
        }
        // timings.txt exists but is not part of the determinism contract.
        assert!(dir_a.join("timings.txt").exists());
        assert!(!rep_a.artifacts.iter().any(|a| a == "timings.txt"));
        for d in [&dir_a, &dir_b] {
            fs::remove_dir_all(d).unwrap();
        }
    }

    #[test]
    fn rational_matrix_completes_without_statistics() {
        let dir = tdir("rational");
        let _ = fs::remove_dir_all(&dir);
        let text = phi_toml(&dir)
            .replace("surd:(1+1*sqrt(5))/2", "rat:2/7")
            .replace("label = \"phi\"", "label = \"r27\"");
        let rep = run_experiment(&ExperimentConfig::from_toml(&text).unwrap()).unwrap();
        assert!(rep.complete);
        assert!(rep.points < 16);
        assert_eq!(rep.verdicts, 0);
        assert!(rep.artifacts.iter().any(|a| a == "seq.jsonl"));
        assert!(!rep.artifacts.iter().any(|a| a == "stats.csv"));
        let seq = io::read_sequence(&dir.join("seq.jsonl")).unwrap();
        assert!(seq.complete);
        assert_eq!(seq.points.last().unwrap().err.hi, Rat::zero());
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn shared_output_directories_are_rejected() {
        let dir = tdir("shared");
        let a = ExperimentConfig::from_toml(&phi_toml(&dir)).unwrap();
        let b = a.clone();
        assert!(matches!(
            run_experiments(vec![a, b]),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn veronese_section_runs_on_extremal_base() {
        let dir = tdir("veronese");
        let _ = fs::remove_dir_all(&dir);
        let text = format!(
            r#"
label = "xi2"
m = 1
n = 2
depth = 12
out = "{}"

[theta]
kind = "extremal_cf"

[veronese]
criteria = ["cc", "36"]
ell = 2

[precision]
cap_bits = 60000
"#,
            dir.display()
        );
        let rep = run_experiment(&ExperimentConfig::from_toml(&text).unwrap()).unwrap();
        assert!(rep.artifacts.iter().any(|a| a == "veronese.json"));
        assert_eq!(rep.incidents, 0);
        let doc: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.join("veronese.json")).unwrap()).unwrap();
        assert!(doc["polynomials"].as_array().unwrap().len() >= 3);
        fs::remove_dir_all(&dir).unwrap();
    }
}
