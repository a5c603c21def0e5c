use std::fmt::Write as _;

use super::escape;
use crate::vtln::FiveNumber;
use crate::{Error, Result};

pub const LEGEND_TITLE: &str = "Augmentation | VTLN";

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#9c755f",
];

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn y(&self, v: f64) -> f64 {
        let span = HEIGHT - TOP - BOTTOM;
        TOP + span * (self.hi - v) / (self.hi - self.lo)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r##"<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn y_ticks(out: &mut String, axis: &Axis, step: f64) {
    let _ = writeln!(
        out,
        r##"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{:.2}" stroke="#000000"/>"##,
        HEIGHT - BOTTOM
    );
    let first = (axis.lo / step).ceil() as i64;
    let last = (axis.hi / step).floor() as i64;
    for i in first..=last {
        let v = i as f64 * step;
        let y = axis.y(v);
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="#000000"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT - 4.0,
            LEFT - 6.0,
            y + 4.0,
            trim_number(v)
        );
    }
}

fn trim_number(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

/// One box per group in the given order, with a dashed reference line at
/// warp factor 1.0.
pub fn plot_warp_boxplot(title: &str, groups: &[(String, FiveNumber)]) -> Result<String> {
    if groups.is_empty() {
        return Err(Error::InvalidArgument("boxplot needs at least one group".into()));
    }
    let lo = groups.iter().map(|(_, s)| s.min).fold(0.8, f64::min) - 0.02;
    let hi = groups.iter().map(|(_, s)| s.max).fold(1.2, f64::max) + 0.02;
    let axis = Axis { lo, hi };
    let mut out = String::new();
    header(&mut out, title);
    y_ticks(&mut out, &axis, 0.05);
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" transform="rotate(-90 16 {:.2})" text-anchor="middle">warp factor</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );

    let slot = (WIDTH - LEFT - RIGHT) / groups.len() as f64;
    let box_w = (slot * 0.5).min(60.0);
    for (i, (label, s)) in groups.iter().enumerate() {
        let cx = LEFT + slot * (i as f64 + 0.5);
        let (x0, x1) = (cx - box_w / 2.0, cx + box_w / 2.0);
        let _ = writeln!(out, r#"<g class="box" data-group="{}">"#, escape(label));
        let _ = writeln!(
            out,
            r##"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="#000000"/>"##,
            axis.y(s.max),
            axis.y(s.q3)
        );
        let _ = writeln!(
            out,
            r##"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="#000000"/>"##,
            axis.y(s.q1),
            axis.y(s.min)
        );
        for v in [s.min, s.max] {
            let y = axis.y(v);
            let _ = writeln!(
                out,
                r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#000000"/>"##,
                cx - box_w / 4.0,
                cx + box_w / 4.0
            );
        }
        let _ = writeln!(
            out,
            r##"<rect x="{x0:.2}" y="{:.2}" width="{box_w:.2}" height="{:.2}" fill="#a6cee3" stroke="#000000"/>"##,
            axis.y(s.q3),
            axis.y(s.q1) - axis.y(s.q3)
        );
        let ym = axis.y(s.median);
        let _ = writeln!(
            out,
            r##"<line class="median" x1="{x0:.2}" y1="{ym:.2}" x2="{x1:.2}" y2="{ym:.2}" stroke="#000000" stroke-width="2"/>"##
        );
        let _ = writeln!(
            out,
            r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            HEIGHT - BOTTOM + 18.0,
            escape(label)
        );
        out.push_str("</g>\n");
    }
    let yr = axis.y(1.0);
    let _ = writeln!(
        out,
        r##"<line class="reference" x1="{LEFT}" y1="{yr:.2}" x2="{:.2}" y2="{yr:.2}" stroke="#d62728" stroke-dasharray="6 4"/>"##,
        WIDTH - RIGHT
    );
    out.push_str("</svg>\n");
    Ok(out)
}

/// One model's value per speaker group.
#[derive(Debug, Clone, PartialEq)]
pub struct BarSeries {
    pub label: String,
    pub values: Vec<f64>,
}

/// Grouped bars: a cluster per speaker group, a bar per series.
pub fn plot_bias_bars(title: &str, groups: &[String], series: &[BarSeries]) -> Result<String> {
    if groups.is_empty() || series.is_empty() {
        return Err(Error::InvalidArgument("bar chart needs at least one group and one series".into()));
    }
    if let Some(s) = series.iter().find(|s| s.values.len() != groups.len()) {
        return Err(Error::Dimension {
            expected: groups.len(),
            got: s.values.len(),
        });
    }
    if series.iter().flat_map(|s| &s.values).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("bar values must be finite".into()));
    }
    let vmax = series.iter().flat_map(|s| &s.values).cloned().fold(0.0, f64::max);
    let vmin = series.iter().flat_map(|s| &s.values).cloned().fold(0.0, f64::min);
    let pad = ((vmax - vmin) * 0.05).max(1.0);
    let axis = Axis {
        lo: if vmin < 0.0 { vmin - pad } else { 0.0 },
        hi: vmax + pad,
    };
    let span = axis.hi - axis.lo;
    let step = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0]
        .into_iter()
        .find(|s| span / s <= 10.0)
        .unwrap_or(200.0);

    let mut out = String::new();
    header(&mut out, title);
    y_ticks(&mut out, &axis, step);
    let plot_right = WIDTH - RIGHT - 170.0;
    let slot = (plot_right - LEFT) / groups.len() as f64;
    let bar_w = slot * 0.8 / series.len() as f64;
    let base = axis.y(0.0);
    for (g, label) in groups.iter().enumerate() {
        let x_start = LEFT + slot * g as f64 + slot * 0.1;
        for (k, s) in series.iter().enumerate() {
            let v = s.values[g];
            let y = axis.y(v);
            let (top, h) = if v >= 0.0 { (y, base - y) } else { (base, y - base) };
            let _ = writeln!(
                out,
                r#"<rect class="bar" data-group="{}" data-series="{}" data-value="{}" x="{:.2}" y="{top:.2}" width="{bar_w:.2}" height="{h:.2}" fill="{}"/>"#,
                escape(label),
                escape(&s.label),
                trim_number(v),
                x_start + bar_w * k as f64,
                PALETTE[k % PALETTE.len()]
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            LEFT + slot * (g as f64 + 0.5),
            HEIGHT - BOTTOM + 18.0,
            escape(label)
        );
    }
    let _ = writeln!(
        out,
        r##"<line class="baseline" x1="{LEFT}" y1="{base:.2}" x2="{plot_right:.2}" y2="{base:.2}" stroke="#000000"/>"##
    );
    let lx = plot_right + 10.0;
    let _ = writeln!(out, r#"<g class="legend"><text x="{lx:.2}" y="{TOP}" font-weight="bold">{LEGEND_TITLE}</text>"#);
    for (k, s) in series.iter().enumerate() {
        let y = TOP + 16.0 * (k as f64 + 1.0);
        let _ = writeln!(
            out,
            r#"<rect x="{lx:.2}" y="{:.2}" width="10" height="10" fill="{}"/><text x="{:.2}" y="{y:.2}">{}</text>"#,
            y - 9.0,
            PALETTE[k % PALETTE.len()],
            lx + 14.0,
            escape(&s.label)
        );
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}
