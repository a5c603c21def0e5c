//! Pipeline configuration file (TOML).
//!
//! Every section is optional and falls back to its defaults. The top-level
//! `seed` replaces the `seed` fields of `[specaug]` and `[vtln]`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dsp::{FrameConfig, MelConfig, MfccConfig, SpeedFactor};
use crate::scoring::{TokenMode, TokenizeOptions};
use crate::specaug::SpecAugPolicy;
use crate::vtln::{Frontend, VtlnConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoringConfig {
    pub mode: TokenMode,
    #[serde(flatten)]
    pub tokenize: TokenizeOptions,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        Self {
            mode: TokenMode::Word,
            tokenize: TokenizeOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    /// Base directory for relative audio paths; defaults to the manifest's
    /// directory.
    pub audio_root: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub speed_factors: Vec<f64>,
    pub frame: FrameConfig,
    /// Log-mel features for the recognizer.
    pub mel: MelConfig,
    /// Cepstra scored by the VTLN model.
    pub mfcc: MfccConfig,
    pub specaug: SpecAugPolicy,
    pub vtln: VtlnConfig,
    pub scoring: ScoringConfig,
    pub paths: PathsConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            speed_factors: vec![0.9, 1.0, 1.1],
            frame: FrameConfig::default(),
            mel: MelConfig::default(),
            mfcc: MfccConfig::default(),
            specaug: SpecAugPolicy::default(),
            vtln: VtlnConfig::default(),
            scoring: ScoringConfig::default(),
            paths: PathsConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string().replace('\n', " ")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn render(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Checks what can be checked without a sample rate.
    pub fn validate(&self) -> Result<()> {
        if self.speed_factors.is_empty() {
            return Err(Error::Config("speed_factors is empty".into()));
        }
        for &b in &self.speed_factors {
            SpeedFactor::new(b).map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.mfcc.n_ceps == 0 || self.mfcc.n_ceps > self.mfcc.mel.n_mels {
            return Err(Error::Config(format!(
                "mfcc.n_ceps {} must be in 1..={}",
                self.mfcc.n_ceps, self.mfcc.mel.n_mels
            )));
        }
        self.vtln.grid.values()?;
        if self.vtln.components == 0 {
            return Err(Error::Config("vtln.components must be positive".into()));
        }
        if !(self.vtln.ridge_per_frame >= 0.0) || !(self.vtln.var_floor_frac > 0.0) {
            return Err(Error::Config(
                "vtln.ridge_per_frame must be >= 0 and vtln.var_floor_frac > 0".into(),
            ));
        }
        Ok(())
    }

    pub fn specaug_policy(&self) -> SpecAugPolicy {
        SpecAugPolicy {
            seed: self.seed,
            ..self.specaug.clone()
        }
    }

    pub fn vtln_config(&self) -> VtlnConfig {
        VtlnConfig {
            seed: self.seed,
            ..self.vtln.clone()
        }
    }

    pub fn frontend(&self) -> Frontend {
        Frontend {
            frame: self.frame.clone(),
            mfcc: self.mfcc.clone(),
        }
    }
}
