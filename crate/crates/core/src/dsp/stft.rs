use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::{FeatureKind, FeatureMatrix, FrameConfig, Waveform};
use crate::{Error, Result};

/// Short-time power spectrum, one row of `fft_size / 2 + 1` bins per frame.
///
/// Frames are not padded at the end: `n_frames = 1 + (N - len) / shift`.
pub fn power_spectrum(wave: &Waveform, cfg: &FrameConfig) -> Result<FeatureMatrix> {
    cfg.validate(wave.sample_rate)?;
    let len = cfg.frame_len_samples(wave.sample_rate);
    let shift = cfg.shift_samples(wave.sample_rate);
    if wave.len() < len {
        return Err(Error::TooShort {
            samples: wave.len(),
            needed: len,
        });
    }
    let n_frames = 1 + (wave.len() - len) / shift;
    let n_bins = cfg.n_bins();
    let window = cfg.window.coefficients(len);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(cfg.fft_size);

    let mut buf = vec![Complex::new(0.0, 0.0); cfg.fft_size];
    let mut frame = vec![0.0f64; len];
    let mut data = Vec::with_capacity(n_frames * n_bins);
    for t in 0..n_frames {
        let start = t * shift;
        for (dst, &s) in frame.iter_mut().zip(&wave.samples[start..start + len]) {
            *dst = s as f64;
        }
        if cfg.preemphasis > 0.0 {
            for i in (1..len).rev() {
                frame[i] -= cfg.preemphasis * frame[i - 1];
            }
            frame[0] -= cfg.preemphasis * frame[0];
        }
        for (i, c) in buf.iter_mut().enumerate() {
            *c = if i < len {
                Complex::new(frame[i] * window[i], 0.0)
            } else {
                Complex::new(0.0, 0.0)
            };
        }
        fft.process(&mut buf);
        data.extend(buf[..n_bins].iter().map(|c| c.norm_sqr() as f32));
    }
    FeatureMatrix::new(
        data,
        n_frames,
        n_bins,
        FeatureKind::Power,
        cfg.frame_shift_ms as f32,
        wave.sample_rate,
    )
}
