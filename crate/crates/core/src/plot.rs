//! Deterministic SVG charts for chains, exponents, and firings.
//!
//! Coordinates are computed in exact rational arithmetic and rendered
//! through the directed decimal printer, so a given input always
//! produces the same bytes, on any platform.  No fonts or styles are
//! embedded; viewers fall back to their sans default.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;

use crate::criteria::{CriterionVerdict, Fired};
use crate::error::{Error, Result};
use crate::interval::{decimal_string, ln_rat, rat_i64, Rat};
use crate::minimal::MinimalPoint;
use crate::stats::ApproximationStats;

const WIDTH: i64 = 640;
const HEIGHT: i64 = 400;
const MARGIN_L: i64 = 62;
const MARGIN_R: i64 = 20;
const MARGIN_T: i64 = 34;
const MARGIN_B: i64 = 42;
const LOG_BITS: u32 = 64;

fn r(v: i64) -> Rat {
    rat_i64(v)
}

/// Pixel coordinate: two decimals, floor-rounded.
fn c(v: &Rat) -> String {
    decimal_string(v, 2, false)
}

/// Tick label: three decimals.
fn lbl(v: &Rat) -> String {
    decimal_string(v, 3, false)
}

struct Frame {
    x0: Rat,
    x1: Rat,
    y0: Rat,
    y1: Rat,
}

impl Frame {
    fn around(xs: &[Rat], ys: &[Rat]) -> Frame {
        let pair = |vals: &[Rat]| {
            let mut lo = vals[0].clone();
            let mut hi = vals[0].clone();
            for v in vals {
                if *v < lo {
                    lo = v.clone();
                }
                if *v > hi {
                    hi = v.clone();
                }
            }
            if lo == hi {
                lo -= Rat::new(BigInt::from(1), BigInt::from(2));
                hi += Rat::new(BigInt::from(1), BigInt::from(2));
            } else {
                let pad = (&hi - &lo) / r(20);
                lo -= pad.clone();
                hi += pad;
            }
            (lo, hi)
        };
        let (x0, x1) = pair(xs);
        let (y0, y1) = pair(ys);
        Frame { x0, x1, y0, y1 }
    }

    fn px(&self, x: &Rat) -> Rat {
        r(MARGIN_L) + (x - &self.x0) / (&self.x1 - &self.x0) * r(WIDTH - MARGIN_L - MARGIN_R)
    }

    fn py(&self, y: &Rat) -> Rat {
        r(HEIGHT - MARGIN_B) - (y - &self.y0) / (&self.y1 - &self.y0) * r(HEIGHT - MARGIN_T - MARGIN_B)
    }
}

struct Series {
    name: &'static str,
    color: &'static str,
    points: Vec<(Rat, Rat)>,
}

fn svg_open(out: &mut String, title: &str) {
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"11\">"
    )
    .expect("string write");
    writeln!(
        out,
        "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>"
    )
    .expect("string write");
    writeln!(
        out,
        "<text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">{}</text>",
        WIDTH / 2,
        xml_escape(title)
    )
    .expect("string write");
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(out: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let left = r(MARGIN_L);
    let right = r(WIDTH - MARGIN_R);
    let top = r(MARGIN_T);
    let bottom = r(HEIGHT - MARGIN_B);
    writeln!(
        out,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#303030\"/>",
        c(&left),
        c(&bottom),
        c(&right),
        c(&bottom)
    )
    .expect("string write");
    writeln!(
        out,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#303030\"/>",
        c(&left),
        c(&top),
        c(&left),
        c(&bottom)
    )
    .expect("string write");
    for i in 0..=4 {
        let t = &frame.y0 + (&frame.y1 - &frame.y0) * r(i) / r(4);
        let y = frame.py(&t);
        writeln!(
            out,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#d0d0d0\"/>",
            c(&left),
            c(&y),
            c(&right),
            c(&y)
        )
        .expect("string write");
        writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
            c(&(&left - r(6))),
            c(&(&y + r(4))),
            lbl(&t)
        )
        .expect("string write");
    }
    writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
        (MARGIN_L + WIDTH - MARGIN_R) / 2,
        HEIGHT - 8,
        xml_escape(x_label)
    )
    .expect("string write");
    writeln!(
        out,
        "<text x=\"14\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">{}</text>",
        (MARGIN_T + HEIGHT - MARGIN_B) / 2,
        (MARGIN_T + HEIGHT - MARGIN_B) / 2,
        xml_escape(y_label)
    )
    .expect("string write");
}

fn x_ticks(out: &mut String, frame: &Frame, ks: &[usize]) {
    let step = (ks.len() / 9).max(1);
    for (i, k) in ks.iter().enumerate() {
        if i % step != 0 && i + 1 != ks.len() {
            continue;
        }
        let x = frame.px(&r(*k as i64));
        writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            c(&x),
            HEIGHT - MARGIN_B + 16,
            k
        )
        .expect("string write");
    }
}

fn chart(title: &str, x_label: &str, y_label: &str, ks: &[usize], series: &[Series]) -> String {
    let xs: Vec<Rat> = ks.iter().map(|k| r(*k as i64)).collect();
    let ys: Vec<Rat> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|(_, y)| y.clone()))
        .collect();
    let frame = Frame::around(&xs, &ys);
    let mut out = String::new();
    svg_open(&mut out, title);
    axes(&mut out, &frame, x_label, y_label);
    x_ticks(&mut out, &frame, ks);
    let mut legend_x = MARGIN_L;
    for s in series {
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|(x, y)| format!("{},{}", c(&frame.px(x)), c(&frame.py(y))))
            .collect();
        writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>",
            s.color,
            pts.join(" ")
        )
        .expect("string write");
        for (x, y) in &s.points {
            writeln!(
                out,
                "<circle cx=\"{}\" cy=\"{}\" r=\"2\" fill=\"{}\"/>",
                c(&frame.px(x)),
                c(&frame.py(y)),
                s.color
            )
            .expect("string write");
        }
        if series.len() > 1 {
            writeln!(
                out,
                "<rect x=\"{legend_x}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/>",
                MARGIN_T - 12,
                s.color
            )
            .expect("string write");
            writeln!(
                out,
                "<text x=\"{}\" y=\"{}\">{}</text>",
                legend_x + 14,
                MARGIN_T - 3,
                xml_escape(s.name)
            )
            .expect("string write");
            legend_x += 14 + 10 * s.name.len() as i64;
        }
    }
    out.push_str("</svg>\n");
    out
}

fn ln_mid(v: &Rat) -> Result<Rat> {
    let iv = ln_rat(v, LOG_BITS)?;
    Ok((&iv.lo + &iv.hi) / r(2))
}

/// Log of the height against the chain index.
pub fn plot_heights(points: &[MinimalPoint], title: &str) -> Result<String> {
    if points.is_empty() {
        return Err(Error::DegenerateWindow("no points to plot".into()));
    }
    let ks: Vec<usize> = points.iter().map(|p| p.k).collect();
    let mut pts = Vec::with_capacity(points.len());
    for p in points {
        let y = ln_mid(&Rat::from_integer(p.norm.clone()))?;
        pts.push((r(p.k as i64), y));
    }
    Ok(chart(
        title,
        "k",
        "ln height",
        &ks,
        &[Series {
            name: "ln height",
            color: "#1f77b4",
            points: pts,
        }],
    ))
}

/// Midpoints of the per-index exponent enclosures against the index.
pub fn plot_exponents(stats: &ApproximationStats, title: &str) -> Result<String> {
    let mid = |rows: &Vec<(usize, crate::interval::Interval)>| -> Vec<(Rat, Rat)> {
        rows.iter()
            .map(|(k, v)| (r(*k as i64), (&v.lo + &v.hi) / r(2)))
            .collect()
    };
    let series = [
        Series {
            name: "nu",
            color: "#1f77b4",
            points: mid(&stats.nu),
        },
        Series {
            name: "tau",
            color: "#2ca02c",
            points: mid(&stats.tau),
        },
        Series {
            name: "sigma",
            color: "#ff7f0e",
            points: mid(&stats.sigma),
        },
        Series {
            name: "w_hat",
            color: "#9467bd",
            points: mid(&stats.what),
        },
    ];
    let keep: Vec<Series> = series
        .into_iter()
        .filter(|s| !s.points.is_empty())
        .collect();
    if keep.is_empty() {
        return Err(Error::DegenerateWindow("no exponent data to plot".into()));
    }
    let mut ks: Vec<usize> = stats.nu.iter().map(|(k, _)| *k).collect();
    if ks.is_empty() {
        ks = stats.tau.iter().map(|(k, _)| *k).collect();
    }
    Ok(chart(title, "k", "exponent", &ks, &keep))
}

/// Raster of criterion outcomes: one row per criterion, one column per
/// chain index.  Returns None when there is nothing to draw.
pub fn plot_firing_raster(verdicts: &[CriterionVerdict], title: &str) -> Option<String> {
    if verdicts.is_empty() {
        return None;
    }
    // Aggregate over window lengths: a firing dominates, then an
    // undecided outcome, then a certified non-firing.
    let mut cells: BTreeMap<(&'static str, usize), Fired> = BTreeMap::new();
    for v in verdicts {
        let slot = cells.entry((v.id.as_str(), v.k)).or_insert(Fired::No);
        *slot = match (*slot, v.fired) {
            (Fired::Yes, _) | (_, Fired::Yes) => Fired::Yes,
            (Fired::Inconclusive, _) | (_, Fired::Inconclusive) => Fired::Inconclusive,
            _ => Fired::No,
        };
    }
    let rows: Vec<&'static str> = {
        let mut seen: Vec<&'static str> = Vec::new();
        for &(id, _) in cells.keys() {
            if !seen.contains(&id) {
                seen.push(id);
            }
        }
        seen
    };
    let mut cols: Vec<usize> = cells.keys().map(|(_, k)| *k).collect();
    cols.sort_unstable();
    cols.dedup();

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let cell_w = Rat::new(BigInt::from(plot_w), BigInt::from(cols.len()));
    let cell_h = Rat::new(BigInt::from(plot_h), BigInt::from(rows.len())).min(r(26));

    let mut out = String::new();
    svg_open(&mut out, title);
    for (ri, id) in rows.iter().enumerate() {
        let y = r(MARGIN_T) + &cell_h * r(ri as i64);
        writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
            MARGIN_L - 6,
            c(&(&y + &cell_h / r(2) + r(4))),
            xml_escape(id)
        )
        .expect("string write");
        for (ci, k) in cols.iter().enumerate() {
            let x = r(MARGIN_L) + &cell_w * r(ci as i64);
            let fill = match cells.get(&(*id, *k)) {
                Some(Fired::Yes) => "#d62728",
                Some(Fired::Inconclusive) => "#c7c7c7",
                _ => "#ffffff",
            };
            writeln!(
                out,
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" stroke=\"#e0e0e0\"/>",
                c(&x),
                c(&y),
                c(&cell_w),
                c(&cell_h),
                fill
            )
            .expect("string write");
        }
    }
    let step = (cols.len() / 12).max(1);
    for (ci, k) in cols.iter().enumerate() {
        if ci % step != 0 && ci + 1 != cols.len() {
            continue;
        }
        let x = r(MARGIN_L) + &cell_w * r(ci as i64) + &cell_w / r(2);
        writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            c(&x),
            HEIGHT - MARGIN_B + 16,
            k
        )
        .expect("string write");
    }
    writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">k</text>",
        (MARGIN_L + WIDTH - MARGIN_R) / 2,
        HEIGHT - 8
    )
    .expect("string write");
    out.push_str("</svg>\n");
    Some(out)
}

/// Write the standard per-matrix charts into `dir`, named by `label`.
/// Returns the files written; the raster is omitted when there are no
/// verdicts to show.
pub fn emit_plots(
    dir: &Path,
    label: &str,
    points: &[MinimalPoint],
    stats: Option<&ApproximationStats>,
    verdicts: &[CriterionVerdict],
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let heights = plot_heights(points, &format!("{label}: height growth"))?;
    let path = dir.join(format!("{label}_heights.svg"));
    fs::write(&path, heights)?;
    written.push(path);
    if let Some(st) = stats {
        let exps = plot_exponents(st, &format!("{label}: exponent estimates"))?;
        let path = dir.join(format!("{label}_exponents.svg"));
        fs::write(&path, exps)?;
        written.push(path);
    }
    if let Some(raster) = plot_firing_raster(verdicts, &format!("{label}: criterion outcomes")) {
        let path = dir.join(format!("{label}_criteria.svg"));
        fs::write(&path, raster)?;
        written.push(path);
    }
    Ok(written)
}
