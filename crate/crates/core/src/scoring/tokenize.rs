use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenMode {
    Word,
    Char,
}

/// Text normalization applied before tokenizing. Both default off.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TokenizeOptions {
    pub lowercase: bool,
    pub strip_punct: bool,
}

/// Words split on whitespace, or characters with whitespace dropped.
pub fn tokenize(text: &str, mode: TokenMode, opts: TokenizeOptions) -> Vec<String> {
    let mut s = if opts.lowercase {
        text.to_lowercase()
    } else {
        text.to_string()
    };
    if opts.strip_punct {
        s = s.chars().filter(|c| !c.is_ascii_punctuation() && !is_unicode_punct(*c)).collect();
    }
    match mode {
        TokenMode::Word => s.split_whitespace().map(str::to_string).collect(),
        TokenMode::Char => s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| c.to_string())
            .collect(),
    }
}

fn is_unicode_punct(c: char) -> bool {
    matches!(
        c,
        '\u{2018}'..='\u{201F}' | '\u{2026}' | '\u{3001}' | '\u{3002}' | '\u{FF0C}' | '\u{FF01}' | '\u{FF1F}' | '\u{00AB}' | '\u{00BB}'
    )
}
