//! Serialization of chains, statistics, and verdicts.
//!
//! The line-oriented JSON sequence format is lossless: integers and
//! error endpoints are written as exact decimal-free strings, so a
//! round-trip reproduces the chain bit for bit and statistics recomputed
//! from a loaded file match the originals.  The CSV variants carry
//! decimal renderings at a stated digit count with directed rounding
//! (lower endpoints down, upper endpoints up), so a printed interval
//! still contains the true one.
//!
//! serde_json keeps object keys in sorted order, which makes every
//! artifact produced here byte-deterministic.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use serde_json::{json, Value};

use crate::criteria::{CriterionVerdict, SoundnessReport};
use crate::error::{Error, Result};
use crate::interval::{decimal_string, Interval, Rat};
use crate::minimal::MinimalPoint;
use crate::stats::{ApproximationStats, AuditReport};

fn rat_str(r: &Rat) -> String {
    r.to_string()
}

fn parse_rat(s: &str) -> Result<Rat> {
    Rat::from_str(s).map_err(|e| Error::InvalidSpec(format!("bad rational '{s}': {e}")))
}

fn parse_int(s: &str) -> Result<BigInt> {
    BigInt::from_str(s).map_err(|e| Error::InvalidSpec(format!("bad integer '{s}': {e}")))
}

/// Interval as a two-element array of exact rational strings.
pub fn interval_json(v: &Interval) -> Value {
    json!([rat_str(&v.lo), rat_str(&v.hi)])
}

fn checked_interval(lo: Rat, hi: Rat) -> Result<Interval> {
    if lo > hi {
        return Err(Error::InvalidSpec(format!(
            "interval endpoints out of order: {lo} > {hi}"
        )));
    }
    Ok(Interval::new(lo, hi))
}

fn str_field(v: &Value) -> Result<&str> {
    v.as_str()
        .ok_or_else(|| Error::InvalidSpec("expected a string field".into()))
}

/// A chain as read back from disk.
#[derive(Clone, Debug)]
pub struct SequenceFile {
    pub m: usize,
    pub n: usize,
    /// True when the chain ended with an exact-zero error.
    pub complete: bool,
    /// Textual spec of the matrix, when the writer knew it.
    pub theta: Vec<String>,
    pub points: Vec<MinimalPoint>,
}

/// One record per line; the first line is a header carrying the shape.
pub fn sequence_jsonl(
    m: usize,
    n: usize,
    complete: bool,
    theta: &[String],
    points: &[MinimalPoint],
) -> String {
    let mut out = String::new();
    let header = json!({
        "complete": complete,
        "m": m,
        "n": n,
        "theta": theta,
    });
    writeln!(out, "{header}").expect("string write");
    for p in points {
        let z: Vec<String> = p.z.iter().map(|c| c.to_string()).collect();
        let rec = json!({
            "err_hi": rat_str(&p.err.hi),
            "err_lo": rat_str(&p.err.lo),
            "k": p.k,
            "norm": p.norm.to_string(),
            "z": z,
        });
        writeln!(out, "{rec}").expect("string write");
    }
    out
}

fn usize_field(v: &Value, name: &str) -> Result<usize> {
    v.get(name)
        .and_then(Value::as_u64)
        .map(|x| x as usize)
        .ok_or_else(|| Error::InvalidSpec(format!("missing or non-integer field '{name}'")))
}

pub fn parse_sequence_jsonl(text: &str) -> Result<SequenceFile> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Value = serde_json::from_str(
        lines
            .next()
            .ok_or_else(|| Error::InvalidSpec("empty sequence file".into()))?,
    )?;
    let m = usize_field(&header, "m")?;
    let n = usize_field(&header, "n")?;
    let complete = header
        .get("complete")
        .and_then(Value::as_bool)
        .unwrap_or(false);
    let theta = header
        .get("theta")
        .and_then(Value::as_array)
        .map(|a| {
            a.iter()
                .map(|v| Ok(str_field(v)?.to_string()))
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?
        .unwrap_or_default();

    let mut points = Vec::new();
    for line in lines {
        let rec: Value = serde_json::from_str(line)?;
        let k = usize_field(&rec, "k")?;
        let z = rec
            .get("z")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::InvalidSpec("point record without coordinates".into()))?
            .iter()
            .map(|v| parse_int(str_field(v)?))
            .collect::<Result<Vec<_>>>()?;
        if z.len() != m + n {
            return Err(Error::ShapeMismatch(format!(
                "point {k} has {} coordinates in a {m}x{n} system",
                z.len()
            )));
        }
        let norm = parse_int(str_field(rec.get("norm").ok_or_else(|| {
            Error::InvalidSpec("point record without a norm".into())
        })?)?)?;
        let err = checked_interval(
            parse_rat(str_field(rec.get("err_lo").ok_or_else(|| {
                Error::InvalidSpec("point record without err_lo".into())
            })?)?)?,
            parse_rat(str_field(rec.get("err_hi").ok_or_else(|| {
                Error::InvalidSpec("point record without err_hi".into())
            })?)?)?,
        )?;
        points.push(MinimalPoint { k, z, norm, err });
    }
    Ok(SequenceFile {
        m,
        n,
        complete,
        theta,
        points,
    })
}

pub fn write_sequence(
    path: &Path,
    m: usize,
    n: usize,
    complete: bool,
    theta: &[String],
    points: &[MinimalPoint],
) -> Result<()> {
    fs::write(path, sequence_jsonl(m, n, complete, theta, points))?;
    Ok(())
}

pub fn read_sequence(path: &Path) -> Result<SequenceFile> {
    parse_sequence_jsonl(&fs::read_to_string(path)?)
}

/// Same records as the JSON lines, rendered to `digits` decimal places.
pub fn sequence_csv(points: &[MinimalPoint], digits: usize) -> String {
    let mut out = String::from("k,norm,err_lo,err_hi,z\n");
    for p in points {
        let z: Vec<String> = p.z.iter().map(|c| c.to_string()).collect();
        writeln!(
            out,
            "{},{},{},{},{}",
            p.k,
            p.norm,
            decimal_string(&p.err.lo, digits, false),
            decimal_string(&p.err.hi, digits, true),
            z.join(" ")
        )
        .expect("string write");
    }
    out
}

fn cell(v: Option<&Interval>, digits: usize) -> (String, String) {
    match v {
        Some(iv) => (
            decimal_string(&iv.lo, digits, false),
            decimal_string(&iv.hi, digits, true),
        ),
        None => (String::new(), String::new()),
    }
}

/// Per-index exponent table; indices outside a quantity's range leave
/// blank cells.
pub fn stats_csv(stats: &ApproximationStats, digits: usize) -> String {
    let mut ks: Vec<usize> = stats.nu.iter().map(|(k, _)| *k).collect();
    for (k, _) in stats.tau.iter().chain(&stats.sigma).chain(&stats.what) {
        if !ks.contains(k) {
            ks.push(*k);
        }
    }
    ks.sort_unstable();
    let mut out =
        String::from("k,nu_lo,nu_hi,tau_lo,tau_hi,sigma_lo,sigma_hi,what_lo,what_hi\n");
    for k in ks {
        let (nl, nh) = cell(stats.nu_at(k), digits);
        let (tl, th) = cell(stats.tau_at(k), digits);
        let (sl, sh) = cell(stats.sigma_at(k), digits);
        let (wl, wh) = cell(stats.what_at(k), digits);
        writeln!(out, "{k},{nl},{nh},{tl},{th},{sl},{sh},{wl},{wh}").expect("string write");
    }
    out
}

/// Inequality audit as JSON: one record per line item, with interval
/// endpoints kept exact.
pub fn audit_report_json(rep: &AuditReport) -> Value {
    let lines: Vec<Value> = rep
        .lines
        .iter()
        .map(|l| {
            json!({
                "lhs_interval": interval_json(&l.lhs),
                "name": l.name,
                "note": l.note,
                "rhs_interval": interval_json(&l.rhs),
                "verdict": l.verdict.to_string(),
            })
        })
        .collect();
    json!({
        "k0": rep.k0,
        "k_max": rep.k_max,
        "lines": lines,
        "m": rep.m,
        "n": rep.n,
    })
}

pub fn verdict_json(v: &CriterionVerdict) -> Value {
    let hyp: Vec<Value> = v
        .hypothesis
        .iter()
        .map(|(name, iv)| json!({"name": name, "value": interval_json(iv)}))
        .collect();
    json!({
        "criterion": v.id.as_str(),
        "ell": v.ell,
        "fired": v.fired.to_string(),
        "ground_truth_rank": v.ground_truth,
        "hypothesis": hyp,
        "k": v.k,
        "note": v.note,
        "sound": v.sound,
    })
}

pub fn soundness_json(rep: &SoundnessReport) -> Value {
    let verdicts: Vec<Value> = rep.verdicts.iter().map(verdict_json).collect();
    let incidents: Vec<Value> = rep
        .incidents
        .iter()
        .map(|i| {
            json!({
                "message": i.message,
                "run_start": i.run_start,
                "verdict": verdict_json(&i.verdict),
            })
        })
        .collect();
    json!({
        "fired": rep.fired_count(),
        "incidents": incidents,
        "skipped": rep.skipped,
        "verdicts": verdicts,
    })
}

/// Pretty-printed JSON document with a trailing newline.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("value serialization");
    s.push('\n');
    s
}

pub fn write_json(path: &Path, v: &Value) -> Result<()> {
    fs::write(path, to_pretty(v))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minimal::{minimal_point_sequence, EngineConfig, SequenceRequest, ThetaMatrix};
    use crate::realspec::RealSpec;
    use crate::stats::{compute_stats, StatsRequest};

    fn phi_chain(count: usize) -> Vec<MinimalPoint> {
        let theta = ThetaMatrix::single(RealSpec::parse("surd:(1+1*sqrt(5))/2").unwrap());
        minimal_point_sequence(
            &theta,
            &SequenceRequest::with_count(count),
            &EngineConfig::default(),
        )
        .unwrap()
        .points
    }

    #[test]
    fn jsonl_round_trip_is_lossless() {
        let pts = phi_chain(8);
        let text = sequence_jsonl(1, 1, false, &["surd:(1+1*sqrt(5))/2".into()], &pts);
        let back = parse_sequence_jsonl(&text).unwrap();
        assert_eq!(back.m, 1);
        assert_eq!(back.n, 1);
        assert!(!back.complete);
        assert_eq!(back.theta, vec!["surd:(1+1*sqrt(5))/2".to_string()]);
        assert_eq!(back.points.len(), pts.len());
        for (a, b) in pts.iter().zip(&back.points) {
            assert_eq!(a.k, b.k);
            assert_eq!(a.z, b.z);
            assert_eq!(a.norm, b.norm);
            assert_eq!(a.err.lo, b.err.lo);
            assert_eq!(a.err.hi, b.err.hi);
        }
        // Same bytes again: the writer is deterministic.
        assert_eq!(
            text,
            sequence_jsonl(1, 1, false, &["surd:(1+1*sqrt(5))/2".into()], &pts)
        );
    }

    #[test]
    fn loaded_points_support_statistics() {
        let pts = phi_chain(12);
        let text = sequence_jsonl(1, 1, false, &[], &pts);
        let back = parse_sequence_jsonl(&text).unwrap();
        let req = StatsRequest::window(2, 12);
        let a = compute_stats(&pts, 1, 1, &req).unwrap();
        let b = compute_stats(&back.points, back.m, back.n, &req).unwrap();
        for ((ka, va), (kb, vb)) in a.nu.iter().zip(&b.nu) {
            assert_eq!(ka, kb);
            assert_eq!(va.lo, vb.lo);
            assert_eq!(va.hi, vb.hi);
        }
    }

    #[test]
    fn csv_endpoints_are_directed() {
        let pts = phi_chain(6);
        let csv = sequence_csv(&pts, 6);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "k,norm,err_lo,err_hi,z");
        for (line, p) in lines.zip(&pts) {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols.len(), 5);
            let lo = crate::interval::parse_decimal(cols[2]).unwrap();
            let hi = crate::interval::parse_decimal(cols[3]).unwrap();
            assert!(lo <= p.err.lo, "printed lower endpoint must round down");
            assert!(hi >= p.err.hi, "printed upper endpoint must round up");
        }
    }

    #[test]
    fn stats_csv_has_blank_cells_outside_ranges() {
        let pts = phi_chain(10);
        let stats = compute_stats(&pts, 1, 1, &StatsRequest::window(2, 10)).unwrap();
        let csv = stats_csv(&stats, 8);
        let last = csv.lines().last().unwrap();
        // The final index has nu but no forward-looking tau/sigma.
        assert!(last.starts_with("10,"));
        assert!(last.contains(",,"));
        let first_data = csv.lines().nth(1).unwrap();
        assert!(first_data.starts_with("2,"));
        let cols: Vec<&str> = first_data.split(',').collect();
        assert_eq!(cols.len(), 9);
        assert!(!cols[1].is_empty() && !cols[2].is_empty());
    }

    #[test]
    fn malformed_lines_are_rejected() {
        assert!(parse_sequence_jsonl("").is_err());
        let missing_norm = "{\"m\":1,\"n\":1}\n{\"k\":1,\"z\":[\"1\",\"-1\"],\"err_lo\":\"1/3\",\"err_hi\":\"1/2\"}\n";
        assert!(parse_sequence_jsonl(missing_norm).is_err());
        let bad_dim = "{\"m\":1,\"n\":1}\n{\"k\":1,\"z\":[\"1\"],\"norm\":\"1\",\"err_lo\":\"1/3\",\"err_hi\":\"1/2\"}\n";
        assert!(matches!(
            parse_sequence_jsonl(bad_dim),
            Err(Error::ShapeMismatch(_))
        ));
    }
}
