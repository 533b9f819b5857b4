//! Trace CSVs and SVG line plots.
//!
//! Plots are rendered from parsed CSV text only, so regenerating an SVG from
//! the files on disk reproduces it byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use crate::config::PlotMetric;
use crate::error::{Error, Result};
use crate::metrics::TraceRecord;

pub const CSV_HEADER: &str = "t,epoch,loss,stat_gap,consensus,tracking,queries";

/// Serializes a trace. Floats use Rust's shortest round-trip decimal form,
/// which never switches to exponent notation.
pub fn trace_to_csv(trace: &[TraceRecord]) -> Result<String> {
    let mut out = String::with_capacity(64 * (trace.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in trace {
        for v in [r.epoch, r.loss, r.stat_gap, r.consensus, r.tracking] {
            if !v.is_finite() {
                return Err(Error::Diverged(r.t));
            }
        }
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.t, r.epoch, r.loss, r.stat_gap, r.consensus, r.tracking, r.queries
        )
        .expect("writing to a String");
    }
    Ok(out)
}

pub fn trace_from_csv(text: &str) -> Result<Vec<TraceRecord>> {
    let bad = |line: usize, message: String| Error::Parse {
        path: "<trace>".into(),
        line,
        message,
    };
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(CSV_HEADER) {
        return Err(bad(1, format!("expected header `{CSV_HEADER}`")));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, line)| {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 7 {
                return Err(bad(k + 2, format!("expected 7 cells, found {}", cells.len())));
            }
            let f = |i: usize| {
                cells[i]
                    .parse::<f64>()
                    .map_err(|_| bad(k + 2, format!("bad number `{}`", cells[i])))
            };
            Ok(TraceRecord {
                t: cells[0].parse().map_err(|_| bad(k + 2, "bad t".into()))?,
                epoch: f(1)?,
                loss: f(2)?,
                stat_gap: f(3)?,
                consensus: f(4)?,
                tracking: f(5)?,
                queries: cells[6].parse().map_err(|_| bad(k + 2, "bad queries".into()))?,
            })
        })
        .collect()
}

/// Elementwise mean of traces recorded on the same iteration grid.
pub fn mean_trace(traces: &[Vec<TraceRecord>]) -> Result<Vec<TraceRecord>> {
    let first = traces
        .first()
        .ok_or_else(|| Error::Dataset("no traces to average".into()))?;
    if traces.iter().any(|t| t.len() != first.len()) {
        return Err(Error::Dataset("traces have different lengths".into()));
    }
    let k = traces.len() as f64;
    (0..first.len())
        .map(|row| {
            let rows: Vec<&TraceRecord> = traces.iter().map(|t| &t[row]).collect();
            if rows.iter().any(|r| r.t != rows[0].t || r.queries != rows[0].queries) {
                return Err(Error::Dataset(format!("traces disagree on the grid at row {row}")));
            }
            let mean = |f: fn(&TraceRecord) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / k;
            Ok(TraceRecord {
                t: rows[0].t,
                epoch: mean(|r| r.epoch),
                loss: mean(|r| r.loss),
                stat_gap: mean(|r| r.stat_gap),
                consensus: mean(|r| r.consensus),
                tracking: mean(|r| r.tracking),
                queries: rows[0].queries,
            })
        })
        .collect()
}

/// Writes `contents` to a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Dataset(format!("not a file path: {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", file_name.to_string_lossy()));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// A named polyline in data coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    /// `(epoch, metric)` pairs from a trace CSV.
    pub fn from_csv(name: impl Into<String>, text: &str, metric: PlotMetric) -> Result<Self> {
        let points = trace_from_csv(text)?
            .iter()
            .map(|r| {
                (
                    r.epoch,
                    match metric {
                        PlotMetric::Loss => r.loss,
                        PlotMetric::StatGap => r.stat_gap,
                    },
                )
            })
            .collect();
        Ok(Self {
            name: name.into(),
            points,
        })
    }
}

#[derive(Debug, Clone)]
pub struct PlotOptions {
    pub title: String,
    pub y_label: String,
    pub log_y: bool,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders a loss-versus-epoch style line plot, one polyline per series.
pub fn render_svg(series: &[Series], opts: &PlotOptions) -> String {
    let transform = |y: f64| if opts.log_y { y.max(1e-300).log10() } else { y };
    let finite: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(|(x, y)| x.is_finite() && y.is_finite() && (!opts.log_y || *y > 0.0))
        .map(|(x, y)| (x, transform(y)))
        .collect();
    let (mut x_min, mut x_max, mut y_min, mut y_max) = finite.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
    );
    if finite.is_empty() {
        (x_min, x_max, y_min, y_max) = (0.0, 1.0, 0.0, 1.0);
    }
    if x_max <= x_min {
        x_max = x_min + 1.0;
    }
    if y_max <= y_min {
        y_max = y_min + 1.0;
    }
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let py = |y: f64| TOP + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(&opts.title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let xv = x_min + f * (x_max - x_min);
        let yv = y_min + f * (y_max - y_min);
        let y_text = if opts.log_y { format!("1e{yv:.1}") } else { format!("{yv:.4}") };
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{:.2}</text>"#,
            px(xv),
            TOP + plot_h + 18.0,
            xv
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            py(yv) + 4.0,
            y_text
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">epochs</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 16.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(&opts.y_label)
    );
    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite() && (!opts.log_y || *y > 0.0))
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(transform(y))))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = TOP + 16.0 + 18.0 * idx as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(&s.name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}
