//! Plain SVG charts of sweep summaries and reward heatmaps.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::experiment::{mean_std, SelectionRecord, SummaryRow, Task};
use crate::io::write_text;
use crate::select::LearnerKind;

pub const WIDTH: f64 = 640.0;
pub const HEIGHT: f64 = 400.0;
pub const MARGIN_LEFT: f64 = 64.0;
pub const MARGIN_RIGHT: f64 = 24.0;
pub const MARGIN_TOP: f64 = 36.0;
pub const MARGIN_BOTTOM: f64 = 48.0;

const COLORS: [&str; 4] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"];

/// Affine map from a data interval onto a pixel interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub px_lo: f64,
    pub px_hi: f64,
}

impl Axis {
    /// Spans the data; a degenerate range is widened by 0.5 on each side.
    pub fn fit(values: impl IntoIterator<Item = f64>, px_lo: f64, px_hi: f64) -> Self {
        let (mut lo, mut hi) = values.into_iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if !lo.is_finite() || !hi.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        Axis { lo, hi, px_lo, px_hi }
    }

    pub fn map(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }
}

/// One line, optionally with a ± band around it.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub band: Option<Vec<f64>>,
    /// Markers only, no connecting line.
    pub scatter: bool,
}

impl Series {
    pub fn line(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series { label: label.into(), points, band: None, scatter: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Horizontal reference line.
    pub baseline: Option<f64>,
}

impl Chart {
    pub fn axes(&self) -> (Axis, Axis) {
        let xs = self.series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
        let mut ys: Vec<f64> = Vec::new();
        for s in &self.series {
            for (i, &(_, y)) in s.points.iter().enumerate() {
                let w = s.band.as_ref().map_or(0.0, |b| b[i]);
                ys.extend([y - w, y + w]);
            }
        }
        ys.extend(self.baseline);
        (
            Axis::fit(xs, MARGIN_LEFT, WIDTH - MARGIN_RIGHT),
            Axis::fit(ys, HEIGHT - MARGIN_BOTTOM, MARGIN_TOP),
        )
    }

    pub fn to_svg(&self) -> String {
        let (xa, ya) = self.axes();
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(&self.title));
        let (x0, x1, y0, y1) = (xa.px_lo, xa.px_hi, ya.px_lo, ya.px_hi);
        let _ = writeln!(s, r#"<line class="axis" x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#);
        let _ = writeln!(s, r#"<line class="axis" x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#);
        for (v, px) in [(xa.lo, x0), (xa.hi, x1)] {
            let _ = writeln!(s, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, y0 + 16.0, tick(v));
        }
        for (v, px) in [(ya.lo, y0), (ya.hi, y1)] {
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 6.0, px + 4.0, tick(v));
        }
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, HEIGHT - 10.0, escape(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(&self.y_label)
        );
        if let Some(b) = self.baseline {
            let y = ya.map(b);
            let _ = writeln!(s, r##"<line class="baseline" x1="{x0}" y1="{y:.2}" x2="{x1}" y2="{y:.2}" stroke="#888" stroke-dasharray="4 3"/>"##);
        }
        for (k, series) in self.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let pts = &series.points;
            if let (Some(band), true) = (&series.band, pts.len() > 1) {
                let upper = pts.iter().zip(band).map(|(&(x, y), w)| (xa.map(x), ya.map(y + w)));
                let lower = pts.iter().zip(band).rev().map(|(&(x, y), w)| (xa.map(x), ya.map(y - w)));
                let _ = writeln!(s, r#"<polygon class="band" points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#, coords(upper.chain(lower)));
            }
            if pts.len() > 1 && !series.scatter {
                let line = pts.iter().map(|&(x, y)| (xa.map(x), ya.map(y)));
                let _ = writeln!(s, r#"<polyline class="series" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, coords(line));
            }
            if pts.len() == 1 || series.scatter {
                for &(x, y) in pts {
                    let _ = writeln!(s, r#"<circle class="marker" cx="{:.2}" cy="{:.2}" r="3.5" fill="{color}"/>"#, xa.map(x), ya.map(y));
                }
            }
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" fill="{color}">{}</text>"#,
                x0 + 10.0,
                y1 + 14.0 + 14.0 * k as f64,
                escape(&series.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn coords(points: impl Iterator<Item = (f64, f64)>) -> String {
    points.map(|(x, y)| format!("{x:.2},{y:.2}")).collect::<Vec<_>>().join(" ")
}

fn tick(v: f64) -> String {
    if v == v.round() && v.abs() < 1e6 {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn candidate_label(learner: LearnerKind) -> &'static str {
    match learner {
        LearnerKind::Lp => "discount factor",
        LearnerKind::MaxEnt => "horizon",
    }
}

fn pct_tag(pct: f64) -> String {
    format!("{pct}").replace('.', "_")
}

/// Writes the sweep charts into `out_dir` and returns the file paths.
///
/// Per (task, learner, percentage): mean all-state error against the
/// candidate with a one-std band. Per (task, learner): the best candidate
/// of the mean curve and its error against the percentage. When selection
/// rows are given, also per (task, learner): error gaps of the
/// cross-validated choice against the oracle choice and the reference.
pub fn emit_plots(summary: &[SummaryRow], selections: &[SelectionRecord], out_dir: &Path, task: Option<Task>) -> Result<Vec<PathBuf>> {
    let keep = |t: Task| task.is_none_or(|want| want == t);
    let mut groups: BTreeMap<(Task, LearnerKind), BTreeMap<u64, Vec<&SummaryRow>>> = BTreeMap::new();
    for r in summary.iter().filter(|r| keep(r.task)) {
        groups.entry((r.task, r.learner)).or_default().entry(r.data_percent.to_bits()).or_default().push(r);
    }
    let mut written = Vec::new();
    if groups.is_empty() {
        log::warn!("nothing to plot");
        return Ok(written);
    }
    std::fs::create_dir_all(out_dir)?;
    for ((t, learner), by_pct) in &groups {
        let mut pcts: Vec<(f64, &Vec<&SummaryRow>)> = by_pct.values().map(|rows| (rows[0].data_percent, rows)).collect();
        pcts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut best = Vec::new();
        let mut best_err = Vec::new();
        for (pct, rows) in &pcts {
            let mut rows = (*rows).clone();
            rows.sort_by(|a, b| a.candidate.value().total_cmp(&b.candidate.value()));
            let chart = Chart {
                title: format!("{} ({}) at {pct}% data", t.name(), learner.name()),
                x_label: candidate_label(*learner).into(),
                y_label: "state errors".into(),
                series: vec![
                    Series {
                        band: Some(rows.iter().map(|r| r.std_full_errors).collect()),
                        ..Series::line("all data", rows.iter().map(|r| (r.candidate.value(), r.mean_full_errors)).collect())
                    },
                    Series {
                        band: Some(rows.iter().map(|r| r.std_val_errors).collect()),
                        ..Series::line("validation", rows.iter().map(|r| (r.candidate.value(), r.mean_val_errors)).collect())
                    },
                ],
                baseline: None,
            };
            let path = out_dir.join(format!("errors_{}_{}_{}.svg", t.name(), learner.name(), pct_tag(*pct)));
            write_text(&path, &chart.to_svg())?;
            written.push(path);
            // first minimum, matching the selection tie-break
            let min = rows.iter().fold(None::<&SummaryRow>, |acc, r| match acc {
                Some(b) if b.mean_full_errors <= r.mean_full_errors => Some(b),
                _ => Some(r),
            });
            let min = min.expect("groups are non-empty");
            best.push((*pct, min.candidate.value()));
            best_err.push((*pct, min.mean_full_errors));
        }
        for (name, label, points) in [("best", candidate_label(*learner), best), ("best_errors", "state errors", best_err)] {
            let chart = Chart {
                title: format!("{} ({}): best {}", t.name(), learner.name(), candidate_label(*learner)),
                x_label: "expert data (% of states)".into(),
                y_label: label.into(),
                series: vec![Series::line(label, points)],
                baseline: None,
            };
            let path = out_dir.join(format!("{name}_{}_{}.svg", t.name(), learner.name()));
            write_text(&path, &chart.to_svg())?;
            written.push(path);
        }

        let sel: Vec<&SelectionRecord> = selections.iter().filter(|s| s.task == *t && s.learner == *learner).collect();
        if sel.is_empty() {
            continue;
        }
        let mut by_pct: BTreeMap<u64, Gaps> = BTreeMap::new();
        for s in &sel {
            let e = by_pct.entry(s.data_percent.to_bits()).or_insert(Gaps { percent: s.data_percent, ..Gaps::default() });
            e.cv_vs_oracle.push(s.cv_errors as f64 - s.oracle_errors as f64);
            e.reference_vs_cv.push(s.reference_errors as f64 - s.cv_errors as f64);
        }
        let mut cells: Vec<Gaps> = by_pct.into_values().collect();
        cells.sort_by(|a, b| a.percent.total_cmp(&b.percent));
        let scatter = |label: &str, pick: fn(&SelectionRecord) -> f64| Series {
            scatter: true,
            ..Series::line(label, sel.iter().map(|s| (s.data_percent, pick(s))).collect())
        };
        let mean_line = |label: &str, col: fn(&Gaps) -> &[f64]| {
            Series::line(label, cells.iter().map(|c| (c.percent, mean_std(col(c)).0)).collect())
        };
        let chart = Chart {
            title: format!("{} ({}): cross-validation gaps", t.name(), learner.name()),
            x_label: "expert data (% of states)".into(),
            y_label: "error difference".into(),
            series: vec![
                mean_line("mean cv - oracle", |c| &c.cv_vs_oracle),
                mean_line("mean reference - cv", |c| &c.reference_vs_cv),
                scatter("cv - oracle", |s| s.cv_errors as f64 - s.oracle_errors as f64),
                scatter("reference - cv", |s| s.reference_errors as f64 - s.cv_errors as f64),
            ],
            baseline: Some(0.0),
        };
        let path = out_dir.join(format!("cv_gap_{}_{}.svg", t.name(), learner.name()));
        write_text(&path, &chart.to_svg())?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Default)]
struct Gaps {
    percent: f64,
    cv_vs_oracle: Vec<f64>,
    reference_vs_cv: Vec<f64>,
}

/// Grid heatmap of per-state values, row-major with `width` cells per row.
pub fn heatmap_svg(title: &str, values: &[f64], width: usize) -> String {
    let cell = 24.0;
    let height = values.len().div_ceil(width.max(1));
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = if hi - lo > 1e-12 { hi - lo } else { 1.0 };
    let (w, h) = (width as f64 * cell, height as f64 * cell + 28.0);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<text x="4" y="18">{}</text>"#, escape(title));
    for (i, &v) in values.iter().enumerate() {
        let shade = (255.0 * (1.0 - (v - lo) / span)).round() as u8;
        let (x, y) = ((i % width) as f64 * cell, (i / width) as f64 * cell + 28.0);
        let _ = writeln!(s, r#"<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="rgb({shade},{shade},255)"/>"#);
    }
    s.push_str("</svg>\n");
    s
}
