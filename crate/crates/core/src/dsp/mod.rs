//! Waveform augmentation and feature extraction.

mod mel;
mod mfcc;
mod resample;
mod stft;
pub mod synth;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use mel::{log_mel, log_mel_from_power, mel_to_hz, hz_to_mel, unwarp_freq, warp_freq, MelFilterbank};
pub use mfcc::{dct_matrix, mfcc, mfcc_from_log_mel};
pub use resample::speed_perturb;
pub use stft::power_spectrum;
pub use synth::synth_formants;

/// Floor applied before taking logs of filterbank energies.
pub const LOG_FLOOR: f64 = 1e-10;

/// Mono PCM audio.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f32>,
    pub sample_rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f32>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidArgument("sample rate must be positive".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite sample at index {i}")));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn nyquist(&self) -> f64 {
        self.sample_rate as f64 / 2.0
    }
}

/// Time-scaling factor for speed perturbation.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SpeedFactor(f64);

impl SpeedFactor {
    pub const MIN: f64 = 0.5;
    pub const MAX: f64 = 2.0;

    pub fn new(beta: f64) -> Result<Self> {
        if !(Self::MIN..=Self::MAX).contains(&beta) {
            return Err(Error::InvalidArgument(format!(
                "speed factor {beta} outside [{}, {}]",
                Self::MIN,
                Self::MAX
            )));
        }
        Ok(Self(beta))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Hamming,
    Hann,
}

impl WindowKind {
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        let denom = (len.max(2) - 1) as f64;
        (0..len)
            .map(|i| {
                let c = (2.0 * std::f64::consts::PI * i as f64 / denom).cos();
                match self {
                    WindowKind::Hamming => 0.54 - 0.46 * c,
                    WindowKind::Hann => 0.5 - 0.5 * c,
                }
            })
            .collect()
    }
}

/// STFT framing parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrameConfig {
    pub frame_length_ms: f64,
    pub frame_shift_ms: f64,
    pub preemphasis: f64,
    pub window: WindowKind,
    pub fft_size: usize,
}

impl Default for FrameConfig {
    fn default() -> Self {
        Self {
            frame_length_ms: 25.0,
            frame_shift_ms: 10.0,
            preemphasis: 0.97,
            window: WindowKind::Hamming,
            fft_size: 512,
        }
    }
}

impl FrameConfig {
    pub fn frame_len_samples(&self, rate: u32) -> usize {
        (self.frame_length_ms * rate as f64 / 1000.0).round() as usize
    }

    pub fn shift_samples(&self, rate: u32) -> usize {
        (self.frame_shift_ms * rate as f64 / 1000.0).round() as usize
    }

    pub fn n_bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    pub fn validate(&self, rate: u32) -> Result<()> {
        let len = self.frame_len_samples(rate);
        let shift = self.shift_samples(rate);
        if len == 0 || shift == 0 {
            return Err(Error::Config("frame length and shift must be positive".into()));
        }
        if shift > len {
            return Err(Error::Config(format!(
                "frame shift ({shift} samples) exceeds frame length ({len})"
            )));
        }
        if !(0.0..1.0).contains(&self.preemphasis) {
            return Err(Error::Config(format!(
                "preemphasis {} outside [0, 1)",
                self.preemphasis
            )));
        }
        if !self.fft_size.is_power_of_two() || self.fft_size < len {
            return Err(Error::Config(format!(
                "fft_size {} must be a power of two >= frame length {len}",
                self.fft_size
            )));
        }
        Ok(())
    }
}

/// Mel filterbank parameters.
///
/// `f_max` and `vtln_high` follow the usual frontend convention: a value
/// `<= 0` is an offset from the Nyquist frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MelConfig {
    pub n_mels: usize,
    pub f_min: f64,
    pub f_max: f64,
    pub vtln_low: f64,
    pub vtln_high: f64,
}

impl Default for MelConfig {
    fn default() -> Self {
        Self {
            n_mels: 80,
            f_min: 20.0,
            f_max: 0.0,
            vtln_low: 100.0,
            vtln_high: -500.0,
        }
    }
}

/// Absolute band edges of a [`MelConfig`] for one sample rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MelBand {
    pub f_min: f64,
    pub f_max: f64,
    pub vtln_low: f64,
    pub vtln_high: f64,
    pub nyquist: f64,
}

impl MelConfig {
    pub fn with_mels(n_mels: usize) -> Self {
        Self {
            n_mels,
            ..Self::default()
        }
    }

    pub fn band(&self, nyquist: f64) -> Result<MelBand> {
        let resolve = |v: f64| if v <= 0.0 { nyquist + v } else { v };
        let band = MelBand {
            f_min: self.f_min,
            f_max: resolve(self.f_max),
            vtln_low: self.vtln_low,
            vtln_high: resolve(self.vtln_high),
            nyquist,
        };
        if self.n_mels == 0 {
            return Err(Error::Config("n_mels must be positive".into()));
        }
        if !(0.0 <= band.f_min && band.f_min < band.f_max && band.f_max <= nyquist) {
            return Err(Error::Config(format!(
                "need 0 <= f_min < f_max <= nyquist, got f_min={} f_max={} nyquist={nyquist}",
                band.f_min, band.f_max
            )));
        }
        if !(band.vtln_low > band.f_min && band.vtln_high < band.f_max && band.vtln_low < band.vtln_high)
        {
            return Err(Error::Config(format!(
                "need f_min < vtln_low < vtln_high < f_max, got vtln_low={} vtln_high={}",
                band.vtln_low, band.vtln_high
            )));
        }
        Ok(band)
    }
}

/// Cepstral feature parameters; the mel stage is usually narrower than the
/// 80-channel log-mel used by the recognizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MfccConfig {
    pub mel: MelConfig,
    pub n_ceps: usize,
    pub mean_norm: bool,
}

impl Default for MfccConfig {
    fn default() -> Self {
        Self {
            mel: MelConfig::with_mels(23),
            n_ceps: 13,
            mean_norm: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    LogMel,
    Mfcc,
    Power,
}

impl FeatureKind {
    pub fn tag(self) -> u8 {
        match self {
            FeatureKind::LogMel => 0,
            FeatureKind::Mfcc => 1,
            FeatureKind::Power => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(FeatureKind::LogMel),
            1 => Some(FeatureKind::Mfcc),
            2 => Some(FeatureKind::Power),
            _ => None,
        }
    }
}

/// Row-major `n_frames x dim` feature matrix with framing metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: Vec<f32>,
    n_frames: usize,
    dim: usize,
    pub kind: FeatureKind,
    pub frame_shift_ms: f32,
    pub source_rate: u32,
}

impl FeatureMatrix {
    pub fn new(
        data: Vec<f32>,
        n_frames: usize,
        dim: usize,
        kind: FeatureKind,
        frame_shift_ms: f32,
        source_rate: u32,
    ) -> Result<Self> {
        if data.len() != n_frames * dim {
            return Err(Error::Dimension {
                expected: n_frames * dim,
                got: data.len(),
            });
        }
        Ok(Self {
            data,
            n_frames,
            dim,
            kind,
            frame_shift_ms,
            source_rate,
        })
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn row(&self, t: usize) -> &[f32] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn row_mut(&mut self, t: usize) -> &mut [f32] {
        &mut self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f32> {
        self.data.chunks_exact(self.dim.max(1))
    }

    pub fn get(&self, t: usize, d: usize) -> f32 {
        self.data[t * self.dim + d]
    }

    pub fn mean(&self) -> f32 {
        if self.data.is_empty() {
            return 0.0;
        }
        (self.data.iter().map(|&v| v as f64).sum::<f64>() / self.data.len() as f64) as f32
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Same metadata, new payload of the same shape.
    pub fn with_data(&self, data: Vec<f32>) -> Result<Self> {
        Self::new(
            data,
            self.n_frames,
            self.dim,
            self.kind,
            self.frame_shift_ms,
            self.source_rate,
        )
    }
}
