use std::fmt::Write as _;

use super::escape;
use crate::scoring::LabeledReport;
use crate::{Error, Result};

/// Colour of the most biased cell.
pub const ACCENT: [u8; 3] = [0xE6, 0x7C, 0x73];

/// Whether shading is scaled per column or over the whole table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShadeScope {
    #[default]
    Column,
    Table,
}

/// Labelled numeric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadedTable {
    pub corner: String,
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<f64>)>,
}

impl ShadedTable {
    /// Overall bias per style plus the average, one row per model labelled
    /// `augmentation | normalization`.
    pub fn from_reports(reports: &[LabeledReport<'_>]) -> Self {
        let columns = reports
            .first()
            .map(|r| {
                let mut c: Vec<String> = r.report.styles.iter().map(|s| s.style.to_string()).collect();
                c.push("Average".into());
                c
            })
            .unwrap_or_default();
        let rows = reports
            .iter()
            .map(|r| {
                let mut v: Vec<f64> = r.report.styles.iter().map(|s| s.overall).collect();
                v.push(r.report.average);
                (format!("{} | {}", r.augmentation, r.normalization), v)
            })
            .collect();
        Self {
            corner: "Augmentation | Normalization".into(),
            columns,
            rows,
        }
    }

    fn validate(&self) -> Result<()> {
        for (label, v) in &self.rows {
            if v.len() != self.columns.len() {
                return Err(Error::Dimension {
                    expected: self.columns.len(),
                    got: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument(format!("non-finite value in row {label}")));
            }
        }
        Ok(())
    }

    fn range(&self, scope: ShadeScope, col: usize) -> (f64, f64) {
        let vals: Vec<f64> = match scope {
            ShadeScope::Column => self.rows.iter().map(|(_, v)| v[col]).collect(),
            ShadeScope::Table => self.rows.iter().flat_map(|(_, v)| v.iter().copied()).collect(),
        };
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

/// White at `lo`, [`ACCENT`] at `hi`, linear in between; white when the
/// range is empty.
pub fn shade_color(v: f64, lo: f64, hi: f64) -> [u8; 3] {
    let t = if hi > lo { ((v - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.0 };
    let mix = |c: u8| (255.0 - t * (255.0 - c as f64)).round() as u8;
    [mix(ACCENT[0]), mix(ACCENT[1]), mix(ACCENT[2])]
}

pub fn render_shaded_html(table: &ShadedTable, scope: ShadeScope) -> Result<String> {
    table.validate()?;
    let mut out = String::new();
    out.push_str("<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><style>\n");
    out.push_str("table{border-collapse:collapse;font-family:sans-serif}\n");
    out.push_str("td,th{border:1px solid #999;padding:4px 8px}\ntd.v{text-align:right}\n");
    out.push_str("</style></head><body>\n<table>\n<tr>");
    let _ = write!(out, "<th>{}</th>", escape(&table.corner));
    for c in &table.columns {
        let _ = write!(out, "<th>{}</th>", escape(c));
    }
    out.push_str("</tr>\n");
    for (label, vals) in &table.rows {
        let _ = write!(out, "<tr><th>{}</th>", escape(label));
        for (c, v) in vals.iter().enumerate() {
            let (lo, hi) = table.range(scope, c);
            let [r, g, b] = shade_color(*v, lo, hi);
            let _ = write!(out, "<td class=\"v\" style=\"background:#{r:02X}{g:02X}{b:02X}\">{v:.2}</td>");
        }
        out.push_str("</tr>\n");
    }
    out.push_str("</table>\n</body></html>\n");
    Ok(out)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn split_csv_line(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match (c, quoted) {
            ('"', true) if chars.peek() == Some(&'"') => {
                cur.push('"');
                chars.next();
            }
            ('"', _) => quoted = !quoted,
            (',', false) => out.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    out.push(cur);
    out
}

/// Raw values at full precision.
pub fn render_shaded_csv(table: &ShadedTable) -> Result<String> {
    table.validate()?;
    let mut out = String::new();
    let head: Vec<String> = std::iter::once(&table.corner)
        .chain(&table.columns)
        .map(|s| csv_field(s))
        .collect();
    out.push_str(&head.join(","));
    out.push('\n');
    for (label, vals) in &table.rows {
        let mut row = vec![csv_field(label)];
        row.extend(vals.iter().map(|v| v.to_string()));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_shaded_csv(text: &str) -> Result<ShadedTable> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let head = split_csv_line(lines.next().ok_or_else(|| Error::InvalidArgument("empty CSV".into()))?);
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let f = split_csv_line(line);
        if f.len() != head.len() {
            return Err(Error::InvalidArgument(format!(
                "CSV row {} has {} fields, header has {}",
                i + 2,
                f.len(),
                head.len()
            )));
        }
        let vals = f[1..]
            .iter()
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("CSV row {}: not a number `{v}`", i + 2)))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push((f[0].clone(), vals));
    }
    Ok(ShadedTable {
        corner: head[0].clone(),
        columns: head[1..].to_vec(),
        rows,
    })
}
