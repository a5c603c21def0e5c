use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use super::{SpeakerGroup, SpeakingStyle};
use crate::{Error, Result};

/// One line of a corpus manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UtteranceRecord {
    pub utt_id: String,
    pub audio_path: PathBuf,
    /// Whitespace-collapsed; empty for unscored audio.
    pub transcript: String,
    pub speaker_id: String,
    pub group: SpeakerGroup,
    pub style: SpeakingStyle,
}

impl UtteranceRecord {
    /// Audio path, resolved against `base` when relative.
    pub fn resolve_audio(&self, base: &Path) -> PathBuf {
        if self.audio_path.is_absolute() {
            self.audio_path.clone()
        } else {
            base.join(&self.audio_path)
        }
    }
}

fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn unquote(s: &str) -> &str {
    let t = s.trim();
    if t.len() >= 2 && t.starts_with('"') && t.ends_with('"') {
        &t[1..t.len() - 1]
    } else {
        t
    }
}

pub fn load_manifest(path: &Path) -> Result<Vec<UtteranceRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_manifest(&text, path)
}

/// Parses manifest text; `origin` is only used in error messages.
pub fn parse_manifest(text: &str, origin: &Path) -> Result<Vec<UtteranceRecord>> {
    let err = |line: usize, msg: String| Error::Manifest {
        path: origin.to_path_buf(),
        line,
        msg,
    };
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 6 {
            return Err(err(lineno, format!("expected 6 tab-separated columns, found {}", cols.len())));
        }
        let utt_id = cols[0].trim();
        let audio = cols[1].trim();
        let speaker_id = cols[3].trim();
        if utt_id.is_empty() {
            return Err(err(lineno, "empty utt_id".into()));
        }
        if audio.is_empty() {
            return Err(err(lineno, format!("empty audio_path for `{utt_id}`")));
        }
        if speaker_id.is_empty() {
            return Err(err(lineno, format!("empty speaker_id for `{utt_id}`")));
        }
        let group: SpeakerGroup = cols[4].trim().parse().map_err(|e| err(lineno, e))?;
        let style: SpeakingStyle = cols[5].trim().parse().map_err(|e| err(lineno, e))?;
        if !seen.insert(utt_id.to_string()) {
            return Err(Error::DuplicateUtterance(utt_id.to_string()));
        }
        out.push(UtteranceRecord {
            utt_id: utt_id.to_string(),
            audio_path: PathBuf::from(audio),
            transcript: collapse_whitespace(unquote(cols[2])),
            speaker_id: speaker_id.to_string(),
            group,
            style,
        });
    }
    Ok(out)
}

fn group_field(g: &SpeakerGroup) -> String {
    match g {
        SpeakerGroup::Custom(l) => format!("custom:{l}"),
        other => other.to_string(),
    }
}

fn style_field(s: &SpeakingStyle) -> String {
    match s {
        SpeakingStyle::Custom(l) => format!("custom:{l}"),
        other => other.to_string(),
    }
}

/// Manifest text that [`parse_manifest`] reads back to the same records.
pub fn render_manifest(records: &[UtteranceRecord]) -> String {
    let mut out = String::from("# utt_id\taudio_path\ttranscript\tspeaker_id\tgroup\tstyle\n");
    for r in records {
        out.push_str(&format!(
            "{}\t{}\t\"{}\"\t{}\t{}\t{}\n",
            r.utt_id,
            r.audio_path.display(),
            r.transcript,
            r.speaker_id,
            group_field(&r.group),
            style_field(&r.style)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Vec<UtteranceRecord>> {
        parse_manifest(text, Path::new("test.tsv"))
    }

    #[test]
    fn single_line_maps_fields() {
        let recs = parse("u1\ta.wav\t\"hello\"\ts1\tDC\tRead\n").unwrap();
        assert_eq!(recs.len(), 1);
        let r = &recs[0];
        assert_eq!(r.utt_id, "u1");
        assert_eq!(r.audio_path, PathBuf::from("a.wav"));
        assert_eq!(r.transcript, "hello");
        assert_eq!(r.speaker_id, "s1");
        assert_eq!(r.group, SpeakerGroup::DC);
        assert_eq!(r.style, SpeakingStyle::Read);
    }

    #[test]
    fn empty_and_comment_only() {
        assert!(parse("").unwrap().is_empty());
        assert!(parse("# header\n\n").unwrap().is_empty());
    }

    #[test]
    fn duplicate_ids_rejected() {
        let text = "u1\ta.wav\tx\ts1\tDC\tRead\nu1\tb.wav\ty\ts2\tDT\tHMI\n";
        match parse(text) {
            Err(Error::DuplicateUtterance(id)) => assert_eq!(id, "u1"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_line_reports_number() {
        let text = "# c\nu1\ta.wav\tx\ts1\tDC\tRead\nu2\tb.wav\n";
        match parse(text) {
            Err(Error::Manifest { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        match parse("u1\ta.wav\tx\ts1\tKids\tRead\n") {
            Err(Error::Manifest { line: 1, msg, .. }) => assert!(msg.contains("Kids")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("u1\ta.wav\tx\ts1\tDC\tSung\n").is_err());
        assert!(parse("u1\t \tx\ts1\tDC\tRead\n").is_err());
    }

    #[test]
    fn transcript_whitespace_collapsed_case_kept() {
        let recs = parse("u1\ta.wav\t  Hello   big\u{a0} World \ts1\tNorm\tCTS\n").unwrap();
        assert_eq!(recs[0].transcript, "Hello big World");
        let recs = parse("u1\ta.wav\t\ts1\tNorm\tCTS\n").unwrap();
        assert_eq!(recs[0].transcript, "");
    }

    #[test]
    fn order_preserved_and_render_round_trips() {
        let text = "b\tb.wav\tone two\ts1\tNnA\tHMI\na\ta.wav\t\ts2\tcustom:kids\tcustom:story\n";
        let recs = parse(text).unwrap();
        assert_eq!(recs[0].utt_id, "b");
        assert_eq!(recs[1].utt_id, "a");
        assert_eq!(parse(&render_manifest(&recs)).unwrap(), recs);
    }
}
