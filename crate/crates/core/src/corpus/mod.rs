//! Dataset manifests, PCM16 WAV I/O and binary feature archives.

mod archive;
mod manifest;
mod wav;

pub use archive::{read_feature_archive, write_feature_archive, FeatureArchive, ARCHIVE_MAGIC};
pub use manifest::{load_manifest, parse_manifest, render_manifest, UtteranceRecord};
pub use wav::{encode_wav, read_wav, write_wav, WavWriteReport};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Speaker group of an utterance. `Norm` is the reference for bias.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SpeakerGroup {
    Norm,
    /// Native children.
    DC,
    /// Native teenagers.
    DT,
    /// Non-native teenagers.
    NnT,
    /// Non-native adults.
    NnA,
    /// Native older adults.
    DOA,
    Custom(String),
}

impl SpeakerGroup {
    pub const DIVERSE: [SpeakerGroup; 5] = [
        SpeakerGroup::DC,
        SpeakerGroup::DT,
        SpeakerGroup::NnT,
        SpeakerGroup::NnA,
        SpeakerGroup::DOA,
    ];

    pub fn is_norm(&self) -> bool {
        matches!(self, SpeakerGroup::Norm)
    }

    pub fn label(&self) -> &str {
        match self {
            SpeakerGroup::Norm => "Norm",
            SpeakerGroup::DC => "DC",
            SpeakerGroup::DT => "DT",
            SpeakerGroup::NnT => "NnT",
            SpeakerGroup::NnA => "NnA",
            SpeakerGroup::DOA => "DOA",
            SpeakerGroup::Custom(s) => s,
        }
    }
}

impl fmt::Display for SpeakerGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Parses the fixed labels; anything else must be spelled `custom:<label>`.
impl FromStr for SpeakerGroup {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "Norm" => SpeakerGroup::Norm,
            "DC" => SpeakerGroup::DC,
            "DT" => SpeakerGroup::DT,
            "NnT" => SpeakerGroup::NnT,
            "NnA" => SpeakerGroup::NnA,
            "DOA" => SpeakerGroup::DOA,
            other => match other.strip_prefix("custom:") {
                Some(label) if !label.is_empty() => SpeakerGroup::Custom(label.to_string()),
                _ => return Err(format!("unknown speaker group `{other}`")),
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SpeakingStyle {
    Read,
    /// Human-machine interaction.
    HMI,
    /// Conversational telephone speech.
    CTS,
    Conversational,
    Custom(String),
}

impl SpeakingStyle {
    pub fn label(&self) -> &str {
        match self {
            SpeakingStyle::Read => "Read",
            SpeakingStyle::HMI => "HMI",
            SpeakingStyle::CTS => "CTS",
            SpeakingStyle::Conversational => "Conversational",
            SpeakingStyle::Custom(s) => s,
        }
    }
}

impl fmt::Display for SpeakingStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SpeakingStyle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "Read" => SpeakingStyle::Read,
            "HMI" => SpeakingStyle::HMI,
            "CTS" => SpeakingStyle::CTS,
            "Conversational" => SpeakingStyle::Conversational,
            other => match other.strip_prefix("custom:") {
                Some(label) if !label.is_empty() => SpeakingStyle::Custom(label.to_string()),
                _ => return Err(format!("unknown speaking style `{other}`")),
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        for g in ["Norm", "DC", "DT", "NnT", "NnA", "DOA", "custom:kids"] {
            let parsed: SpeakerGroup = g.parse().unwrap();
            let shown = match &parsed {
                SpeakerGroup::Custom(l) => format!("custom:{l}"),
                other => other.to_string(),
            };
            assert_eq!(shown, g);
        }
        assert!("children".parse::<SpeakerGroup>().is_err());
        assert!("custom:".parse::<SpeakingStyle>().is_err());
        assert_eq!("HMI".parse::<SpeakingStyle>().unwrap(), SpeakingStyle::HMI);
    }
}
