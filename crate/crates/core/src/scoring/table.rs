//! Text formats of the scoring layer: WER tables, hypothesis files, group
//! score CSVs and rendered bias tables.
//!
//! A WER table is tab-separated with a header line:
//!
//! ```text
//! model  augmentation  normalization  Norm:Read  Norm:HMI  Read:DC ... HMI:DOA
//! ```
//!
//! `Norm:<style>` holds the norm-group rate matched to a diverse style and
//! `<style>:<group>` a diverse group's rate. `#` lines are comments.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{bias_report, BiasReport, GroupScore, StyleRates};
use crate::corpus::{SpeakerGroup, SpeakingStyle};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WerTableRow {
    pub model: String,
    pub augmentation: String,
    pub normalization: String,
    pub styles: Vec<StyleRates>,
}

impl WerTableRow {
    pub fn bias_report(&self) -> Result<BiasReport> {
        bias_report(&self.styles)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WerTable {
    pub rows: Vec<WerTableRow>,
}

enum Column {
    Norm(SpeakingStyle),
    Cell(SpeakingStyle, SpeakerGroup),
}

fn table_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Manifest {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

pub fn read_wer_table(path: &Path) -> Result<WerTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_wer_table(&text, path)
}

pub fn parse_wer_table(text: &str, origin: &Path) -> Result<WerTable> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let (hline, header) = lines
        .next()
        .ok_or_else(|| table_err(origin, 1, "missing header line"))?;
    let head: Vec<&str> = header.split('\t').map(str::trim).collect();
    if head.len() < 5 || head[..3] != ["model", "augmentation", "normalization"] {
        return Err(table_err(
            origin,
            hline,
            "header must start with model, augmentation, normalization",
        ));
    }
    let mut columns = Vec::new();
    for h in &head[3..] {
        let (a, b) = h
            .split_once(':')
            .ok_or_else(|| table_err(origin, hline, format!("bad column `{h}`")))?;
        if a == "Norm" {
            let style = b.parse().map_err(|e: String| table_err(origin, hline, e))?;
            columns.push(Column::Norm(style));
        } else {
            let style = a.parse().map_err(|e: String| table_err(origin, hline, e))?;
            let group: SpeakerGroup = b.parse().map_err(|e: String| table_err(origin, hline, e))?;
            if group.is_norm() {
                return Err(table_err(origin, hline, format!("use Norm:<style> instead of `{h}`")));
            }
            columns.push(Column::Cell(style, group));
        }
    }
    // Style order follows the first cell column of each style.
    let mut style_order: Vec<SpeakingStyle> = Vec::new();
    for c in &columns {
        if let Column::Cell(s, _) = c {
            if !style_order.contains(s) {
                style_order.push(s.clone());
            }
        }
    }
    for s in &style_order {
        if !columns.iter().any(|c| matches!(c, Column::Norm(n) if n == s)) {
            return Err(table_err(origin, hline, format!("no Norm:{s} column")));
        }
    }

    let mut rows = Vec::new();
    for (lineno, line) in lines {
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        if cols.len() != head.len() {
            return Err(table_err(
                origin,
                lineno,
                format!("expected {} columns, found {}", head.len(), cols.len()),
            ));
        }
        let mut styles: Vec<StyleRates> = style_order
            .iter()
            .map(|s| StyleRates {
                style: s.clone(),
                norm_rate: f64::NAN,
                groups: Vec::new(),
            })
            .collect();
        for (col, raw) in columns.iter().zip(&cols[3..]) {
            let v: f64 = raw
                .parse()
                .map_err(|_| table_err(origin, lineno, format!("not a number: `{raw}`")))?;
            if !v.is_finite() {
                return Err(table_err(origin, lineno, format!("non-finite rate `{raw}`")));
            }
            match col {
                Column::Norm(s) => {
                    if let Some(sr) = styles.iter_mut().find(|x| &x.style == s) {
                        sr.norm_rate = v;
                    }
                }
                Column::Cell(s, g) => {
                    let sr = styles.iter_mut().find(|x| &x.style == s).unwrap();
                    sr.groups.push((g.clone(), v));
                }
            }
        }
        rows.push(WerTableRow {
            model: cols[0].to_string(),
            augmentation: cols[1].to_string(),
            normalization: cols[2].to_string(),
            styles,
        });
    }
    Ok(WerTable { rows })
}

/// `utt_id <TAB> hypothesis` lines; a missing second column is an empty
/// hypothesis.
pub fn read_hypotheses(path: &Path) -> Result<HashMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, hyp) = line.split_once('\t').unwrap_or((line, ""));
        let id = id.trim();
        if id.is_empty() {
            return Err(table_err(path, i + 1, "empty utt_id"));
        }
        if out.insert(id.to_string(), hyp.trim().to_string()).is_some() {
            return Err(Error::DuplicateUtterance(id.to_string()));
        }
    }
    Ok(out)
}

fn field(g: &SpeakerGroup) -> String {
    match g {
        SpeakerGroup::Custom(l) => format!("custom:{l}"),
        o => o.to_string(),
    }
}

fn style_field(s: &SpeakingStyle) -> String {
    match s {
        SpeakingStyle::Custom(l) => format!("custom:{l}"),
        o => o.to_string(),
    }
}

pub fn render_group_scores_csv(scores: &[GroupScore]) -> String {
    let mut out = String::from("group,style,error_rate,n_ref,errors,utterances\n");
    for s in scores {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            field(&s.group),
            style_field(&s.style),
            s.error_rate,
            s.n_ref_total,
            s.errors,
            s.utterance_count
        );
    }
    out
}

pub fn parse_group_scores_csv(text: &str, origin: &Path) -> Result<Vec<GroupScore>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let c: Vec<&str> = line.split(',').map(str::trim).collect();
        let err = |m: String| table_err(origin, i + 1, m);
        if c.len() != 6 {
            return Err(err(format!("expected 6 columns, found {}", c.len())));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| err(format!("not a count: `{s}`")));
        out.push(GroupScore {
            group: c[0].parse().map_err(err)?,
            style: c[1].parse().map_err(err)?,
            error_rate: c[2].parse().map_err(|_| err(format!("not a rate: `{}`", c[2])))?,
            n_ref_total: num(c[3])?,
            errors: num(c[4])?,
            utterance_count: num(c[5])?,
        });
    }
    Ok(out)
}

/// A bias report with the model labels it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledReport<'a> {
    pub model: &'a str,
    pub augmentation: &'a str,
    pub normalization: &'a str,
    pub report: &'a BiasReport,
}

/// One CSV line per report, biases at two decimals.
pub fn render_bias_csv(reports: &[LabeledReport<'_>]) -> String {
    let mut out = String::new();
    let Some(first) = reports.first() else {
        return out;
    };
    let mut head = vec!["model".to_string(), "augmentation".into(), "normalization".into()];
    for s in &first.report.styles {
        head.push(format!("overall:{}", style_field(&s.style)));
    }
    head.push("overall:Average".into());
    for s in &first.report.styles {
        for g in &s.groups {
            head.push(format!("{}:{}", style_field(&s.style), field(&g.group)));
        }
    }
    for (g, _) in &first.report.group_average {
        head.push(format!("group_average:{}", field(g)));
    }
    head.push("mean_group_rate".into());
    out.push_str(&head.join(","));
    out.push('\n');
    for r in reports {
        let mut row = vec![
            r.model.replace(',', ";"),
            r.augmentation.replace(',', ";"),
            r.normalization.replace(',', ";"),
        ];
        row.extend(r.report.styles.iter().map(|s| format!("{:.2}", s.overall)));
        row.push(format!("{:.2}", r.report.average));
        for s in &r.report.styles {
            row.extend(s.groups.iter().map(|g| format!("{:.2}", g.bias)));
        }
        row.extend(r.report.group_average.iter().map(|(_, b)| format!("{:.2}", b)));
        row.push(format!("{:.2}", r.report.mean_group_rate));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Aligned plain-text overall-bias table.
pub fn render_bias_text(reports: &[LabeledReport<'_>]) -> String {
    let Some(first) = reports.first() else {
        return String::new();
    };
    let mut head = vec!["Model".to_string(), "Augmentation".into(), "Normalization".into()];
    head.extend(first.report.styles.iter().map(|s| s.style.to_string()));
    head.push("Average".into());
    let mut rows = vec![head];
    for r in reports {
        let mut row = vec![r.model.to_string(), r.augmentation.to_string(), r.normalization.to_string()];
        row.extend(r.report.styles.iter().map(|s| format!("{:.2}", s.overall)));
        row.push(format!("{:.2}", r.report.average));
        rows.push(row);
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (v, w))| if c < 3 { format!("{v:<w$}") } else { format!("{v:>w$}") })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
        if i == 0 {
            out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
            out.push('\n');
        }
    }
    let flagged: Vec<String> = reports
        .iter()
        .flat_map(|r| {
            r.report
                .violations()
                .into_iter()
                .map(move |(s, g)| format!("{} {s}:{g}", r.model))
        })
        .collect();
    if !flagged.is_empty() {
        let _ = writeln!(out, "note: group rate not above norm rate in {}", flagged.join(", "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE: &str = "\
# two rows
model\taugmentation\tnormalization\tNorm:Read\tNorm:HMI\tRead:DC\tRead:DT\tHMI:DC\tHMI:DT
(x)\tNone\tNone\t10\t20\t30\t20\t40\t25
(y)\tSP\tNone\t10\t20\t10\t12\t30\t20
";

    #[test]
    fn parses_and_reports() {
        let t = parse_wer_table(TABLE, Path::new("t.tsv")).unwrap();
        assert_eq!(t.rows.len(), 2);
        let r = t.rows[0].bias_report().unwrap();
        assert_eq!(r.styles[0].overall, 15.0);
        assert_eq!(r.styles[1].overall, 12.5);
        let r1 = t.rows[1].bias_report().unwrap();
        let labeled = [
            LabeledReport { model: "(x)", augmentation: "None", normalization: "None", report: &r },
            LabeledReport { model: "(y)", augmentation: "SP", normalization: "None", report: &r1 },
        ];
        let csv = render_bias_csv(&labeled);
        assert!(csv.starts_with("model,augmentation,normalization,overall:Read,overall:HMI,overall:Average"));
        assert!(csv.lines().nth(1).unwrap().starts_with("(x),None,None,15.00,12.50,13.75"));
        let text = render_bias_text(&labeled);
        assert!(text.contains("13.75"));
        assert!(text.contains("note: group rate not above norm rate in (y) Read:DC"));
    }

    #[test]
    fn rejects_bad_tables() {
        let p = Path::new("t.tsv");
        assert!(parse_wer_table("", p).is_err());
        assert!(parse_wer_table("model\taug\tnormalization\tNorm:Read\tRead:DC\n", p).is_err());
        assert!(parse_wer_table("model\taugmentation\tnormalization\tRead:DC\tRead:DT\n", p)
            .unwrap_err()
            .to_string()
            .contains("Norm:Read"));
        let bad_num = "model\taugmentation\tnormalization\tNorm:Read\tRead:DC\nx\ta\tb\t1\tabc\n";
        match parse_wer_table(bad_num, p) {
            Err(Error::Manifest { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn group_scores_csv_round_trip() {
        let scores = vec![GroupScore {
            group: SpeakerGroup::Custom("kids".into()),
            style: SpeakingStyle::HMI,
            error_rate: 12.345678,
            n_ref_total: 81,
            errors: 10,
            utterance_count: 3,
        }];
        let text = render_group_scores_csv(&scores);
        assert_eq!(parse_group_scores_csv(&text, Path::new("s.csv")).unwrap(), scores);
    }
}
