//! Mel filterbanks with piecewise-linear VTLN frequency warping.
//!
//! The warp `g(f)` maps a frequency of the normalized (reference-speaker)
//! axis onto the physical axis. In the central band `g(f) = f / alpha`; a
//! linear segment above `vtln_high * min(1, alpha)` pins `g(nyquist) =
//! nyquist`, and `g(0) = 0`. Each filter of the warped bank is placed at
//! `g(centre)`, so `alpha < 1` moves filters up and compresses the spectrum
//! of a speaker with high formants towards the reference.

use super::{FeatureKind, FeatureMatrix, FrameConfig, MelBand, MelConfig, Waveform, LOG_FLOOR};
use crate::{Error, Result};

pub const MIN_WARP: f64 = 0.5;
pub const MAX_WARP: f64 = 2.0;

pub fn hz_to_mel(f: f64) -> f64 {
    1127.0 * (1.0 + f / 700.0).ln()
}

pub fn mel_to_hz(m: f64) -> f64 {
    700.0 * ((m / 1127.0).exp() - 1.0)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(MIN_WARP..=MAX_WARP).contains(&alpha) {
        return Err(Error::InvalidArgument(format!(
            "warp factor {alpha} outside [{MIN_WARP}, {MAX_WARP}]"
        )));
    }
    Ok(())
}

/// Breakpoint of the upper linear segment, on the normalized axis.
fn upper_knee(alpha: f64, band: &MelBand) -> f64 {
    band.vtln_high * alpha.min(1.0)
}

fn warp(alpha: f64, f: f64, band: &MelBand) -> f64 {
    if alpha == 1.0 {
        return f;
    }
    let h = upper_knee(alpha, band);
    if f <= h {
        f / alpha
    } else {
        let gh = h / alpha;
        gh + (f - h) * (band.nyquist - gh) / (band.nyquist - h)
    }
}

fn unwarp(alpha: f64, y: f64, band: &MelBand) -> f64 {
    if alpha == 1.0 {
        return y;
    }
    let h = upper_knee(alpha, band);
    let gh = h / alpha;
    if y <= gh {
        y * alpha
    } else {
        h + (y - gh) * (band.nyquist - h) / (band.nyquist - gh)
    }
}

/// Maps normalized-axis frequency `freq` to the physical axis for warp factor
/// `alpha`.
pub fn warp_freq(alpha: f64, freq: f64, mel: &MelConfig, nyquist: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let band = mel.band(nyquist)?;
    if !(0.0..=nyquist).contains(&freq) {
        return Err(Error::InvalidArgument(format!(
            "frequency {freq} outside [0, {nyquist}]"
        )));
    }
    Ok(warp(alpha, freq, &band))
}

/// Inverse of [`warp_freq`].
pub fn unwarp_freq(alpha: f64, freq: f64, mel: &MelConfig, nyquist: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let band = mel.band(nyquist)?;
    if !(0.0..=nyquist).contains(&freq) {
        return Err(Error::InvalidArgument(format!(
            "frequency {freq} outside [0, {nyquist}]"
        )));
    }
    Ok(unwarp(alpha, freq, &band))
}

/// Dense `n_mels x (fft_size / 2 + 1)` triangular filterbank.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    weights: Vec<f64>,
    n_mels: usize,
    n_bins: usize,
    alpha: f64,
}

impl MelFilterbank {
    /// Filterbank warped by `alpha`; `alpha == 1` is the standard bank.
    pub fn new(mel: &MelConfig, frame: &FrameConfig, rate: u32, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let band = mel.band(rate as f64 / 2.0)?;
        let mut fb = Self::build(mel, frame, rate, |f| unwarp(alpha, f, &band))?;
        fb.alpha = alpha;
        Ok(fb)
    }

    /// The standard bank, built without touching the warp function.
    pub fn unwarped(mel: &MelConfig, frame: &FrameConfig, rate: u32) -> Result<Self> {
        Self::build(mel, frame, rate, |f| f)
    }

    fn build(
        mel: &MelConfig,
        frame: &FrameConfig,
        rate: u32,
        to_normalized: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        frame.validate(rate)?;
        let band = mel.band(rate as f64 / 2.0)?;
        let n_bins = frame.n_bins();
        let n_mels = mel.n_mels;
        let mel_lo = hz_to_mel(band.f_min);
        let mel_hi = hz_to_mel(band.f_max);
        let delta = (mel_hi - mel_lo) / (n_mels + 1) as f64;
        let bin_hz = rate as f64 / frame.fft_size as f64;

        // Normalized-axis mel position of every physical FFT bin.
        let bin_mel: Vec<f64> = (0..n_bins)
            .map(|k| hz_to_mel(to_normalized(k as f64 * bin_hz)))
            .collect();

        let mut weights = vec![0.0; n_mels * n_bins];
        for m in 0..n_mels {
            let left = mel_lo + m as f64 * delta;
            let centre = left + delta;
            let right = centre + delta;
            let row = &mut weights[m * n_bins..(m + 1) * n_bins];
            for (w, &pos) in row.iter_mut().zip(&bin_mel) {
                if pos > left && pos < right {
                    *w = if pos <= centre {
                        (pos - left) / (centre - left)
                    } else {
                        (right - pos) / (right - centre)
                    };
                }
            }
            if row.iter().all(|&w| w == 0.0) {
                return Err(Error::Config(format!(
                    "mel filter {m} of {n_mels} has no FFT bins; too many mel channels for fft_size {}",
                    frame.fft_size
                )));
            }
        }
        Ok(Self {
            weights,
            n_mels,
            n_bins,
            alpha: 1.0,
        })
    }

    pub fn n_mels(&self) -> usize {
        self.n_mels
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.weights[m * self.n_bins..(m + 1) * self.n_bins]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Filter energies `H * p` for one power-spectrum row.
    pub fn energies(&self, power: &[f32], out: &mut [f64]) {
        for (m, o) in out.iter_mut().enumerate() {
            *o = self
                .row(m)
                .iter()
                .zip(power)
                .filter(|(w, _)| **w != 0.0)
                .map(|(w, &p)| w * p as f64)
                .sum();
        }
    }
}

/// `log(max(H * power, floor))` for every frame of a power spectrum.
pub fn log_mel_from_power(power: &FeatureMatrix, fb: &MelFilterbank) -> Result<FeatureMatrix> {
    if power.dim() != fb.n_bins() {
        return Err(Error::Dimension {
            expected: fb.n_bins(),
            got: power.dim(),
        });
    }
    let mut energies = vec![0.0; fb.n_mels()];
    let mut data = Vec::with_capacity(power.n_frames() * fb.n_mels());
    for row in power.rows() {
        fb.energies(row, &mut energies);
        data.extend(energies.iter().map(|&e| e.max(LOG_FLOOR).ln() as f32));
    }
    FeatureMatrix::new(
        data,
        power.n_frames(),
        fb.n_mels(),
        FeatureKind::LogMel,
        power.frame_shift_ms,
        power.source_rate,
    )
}

/// Log-mel filterbank features with VTLN warp `alpha`.
pub fn log_mel(
    wave: &Waveform,
    frame: &FrameConfig,
    mel: &MelConfig,
    alpha: f64,
) -> Result<FeatureMatrix> {
    let fb = MelFilterbank::new(mel, frame, wave.sample_rate, alpha)?;
    let power = super::power_spectrum(wave, frame)?;
    log_mel_from_power(&power, &fb)
}
