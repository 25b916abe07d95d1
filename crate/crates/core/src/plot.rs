//! Minimal SVG line charts of experiment metrics.

use std::fmt::Write;

use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::{AggregateResult, Metric, MetricRecord};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 55.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

/// Fixed colors for the built-in solvers, a name hash for anything else.
pub fn solver_color(name: &str) -> &'static str {
    match name {
        "ihwt" => "#d62728",
        "iht" => "#1f77b4",
        "cosamp" => "#2ca02c",
        "omp" => "#ff7f0e",
        other => {
            // FNV-1a
            let h = other
                .bytes()
                .fold(0xcbf29ce484222325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100000001b3));
            PALETTE[(h % PALETTE.len() as u64) as usize]
        }
    }
}

struct Series<'a> {
    solver: &'a str,
    points: Vec<(f64, f64)>,
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|f| f * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + step * 1e-9 {
        out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

/// Renders the records of `metric` as an SVG 1.1 document: one polyline per
/// solver with at least two finite points, circle markers for solvers with a
/// single point. Missing and infinite values are skipped.
pub fn render_svg(records: &[MetricRecord], metric: &str) -> Result<String> {
    let selected: Vec<&MetricRecord> = records.iter().filter(|r| r.metric == metric).collect();
    if selected.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "nothing to plot for metric '{metric}'"
        )));
    }
    let sweep_param = selected[0].sweep_param.clone();
    let mut series: Vec<Series> = Vec::new();
    for r in &selected {
        let idx = match series.iter().position(|s| s.solver == r.solver) {
            Some(i) => i,
            None => {
                series.push(Series {
                    solver: &r.solver,
                    points: Vec::new(),
                });
                series.len() - 1
            }
        };
        if let Some(v) = r.value.filter(|v| v.is_finite()) {
            series[idx].points.push((r.sweep_value as f64, v));
        }
    }
    for s in &mut series {
        s.points.sort_by(|a, b| a.0.total_cmp(&b.0));
    }

    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x0 -= 1.0;
        x1 += 1.0;
    }
    if y1 - y0 < 1e-12 {
        let pad = y0.abs().max(1.0) * 0.1;
        y0 -= pad;
        y1 += pad;
    }
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">
<rect width="100%" height="100%" fill="white"/>
<g font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for t in nice_ticks(x0, x1) {
        let x = sx(t);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 18.0,
            fmt_tick(t)
        );
    }
    for t in nice_ticks(y0, y1) {
        let y = sy(t);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0,
            fmt_tick(t)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{sweep_param}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{metric}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    for (i, s) in series.iter().enumerate() {
        let color = solver_color(s.solver);
        match s.points.len() {
            0 => {}
            1 => {
                let (x, y) = s.points[0];
                let _ = writeln!(
                    svg,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{color}"/>"#,
                    sx(x),
                    sy(y)
                );
            }
            _ => {
                let pts: Vec<String> = s
                    .points
                    .iter()
                    .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                    .collect();
                let _ = writeln!(
                    svg,
                    r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                    pts.join(" ")
                );
            }
        }
        let ly = TOP + 15.0 + 20.0 * i as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            svg,
            r#"<rect x="{lx:.2}" y="{:.2}" width="14" height="4" fill="{color}"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            ly - 4.0,
            lx + 20.0,
            ly + 2.0,
            s.solver
        );
    }
    svg.push_str("</g>\n</svg>\n");
    Ok(svg)
}

/// Writes the chart of one metric of an aggregate to `path`.
pub fn emit_plot(agg: &AggregateResult, metric: Metric, path: &Path) -> Result<()> {
    if agg.rows.is_empty() {
        return Err(Error::InvalidArgument("empty aggregate".into()));
    }
    let svg = render_svg(&agg.records(), metric.name())?;
    std::fs::write(path, svg)
        .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}
