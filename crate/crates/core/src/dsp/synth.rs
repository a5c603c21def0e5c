//! Formant synthesis for oracle tests.
//!
//! A glottal impulse train at `f0` is passed through a cascade of two-pole
//! resonators. Scaling every resonance by the same factor mimics a change
//! of vocal tract length.

use std::f64::consts::PI;

use rand::Rng;

use super::Waveform;
use crate::{Error, Result};

/// Reference vowel resonances `(centre Hz, bandwidth Hz)`, adult-male-like.
pub const VOWELS: [[(f64, f64); 4]; 6] = [
    [(270.0, 60.0), (2290.0, 90.0), (3010.0, 120.0), (3600.0, 150.0)],
    [(530.0, 60.0), (1840.0, 90.0), (2480.0, 120.0), (3500.0, 150.0)],
    [(730.0, 70.0), (1090.0, 90.0), (2440.0, 120.0), (3400.0, 150.0)],
    [(570.0, 60.0), (840.0, 80.0), (2410.0, 120.0), (3300.0, 150.0)],
    [(300.0, 60.0), (870.0, 80.0), (2240.0, 120.0), (3300.0, 150.0)],
    [(660.0, 70.0), (1720.0, 90.0), (2410.0, 120.0), (3500.0, 150.0)],
];

/// Peak amplitude of synthesized audio.
const PEAK: f32 = 0.5;

/// Impulse train at `f0` through resonators placed at `scale * centre` (with
/// bandwidths scaled alike). Output is peak-normalized and deterministic.
pub fn synth_formants(
    f0: f64,
    formants: &[(f64, f64)],
    duration_s: f64,
    rate: u32,
    scale: f64,
) -> Result<Waveform> {
    let nyquist = rate as f64 / 2.0;
    if !(f0 > 0.0 && f0 < nyquist) {
        return Err(Error::InvalidArgument(format!("f0 {f0} outside (0, {nyquist})")));
    }
    if !(scale > 0.0) || !(duration_s > 0.0) {
        return Err(Error::InvalidArgument(
            "scale and duration must be positive".into(),
        ));
    }
    for &(centre, bw) in formants {
        if centre * scale >= nyquist {
            return Err(Error::InvalidArgument(format!(
                "formant {centre} Hz scaled by {scale} reaches nyquist {nyquist}"
            )));
        }
        if !(bw > 0.0) {
            return Err(Error::InvalidArgument(format!("bandwidth {bw} must be positive")));
        }
    }

    let n = (duration_s * rate as f64).round() as usize;
    let period = rate as f64 / f0;
    let mut signal = vec![0.0f64; n];
    let mut next = 0.0f64;
    while (next as usize) < n {
        signal[next as usize] = 1.0;
        next += period;
    }

    for &(centre, bw) in formants {
        resonate(&mut signal, centre * scale, bw * scale, rate as f64);
    }

    let peak = signal.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let gain = if peak > 0.0 { PEAK as f64 / peak } else { 0.0 };
    Waveform::new(signal.into_iter().map(|v| (v * gain) as f32).collect(), rate)
}

/// Unity-DC-gain two-pole resonator, in place.
fn resonate(x: &mut [f64], centre: f64, bandwidth: f64, rate: f64) {
    let r = (-PI * bandwidth / rate).exp();
    let theta = 2.0 * PI * centre / rate;
    let a1 = 2.0 * r * theta.cos();
    let a2 = -r * r;
    let g = 1.0 - a1 - a2;
    let (mut y1, mut y2) = (0.0, 0.0);
    for v in x.iter_mut() {
        let y = g * *v + a1 * y1 + a2 * y2;
        y2 = y1;
        y1 = y;
        *v = y;
    }
}

/// One synthetic utterance: a few vowels from [`VOWELS`] at a random pitch.
///
/// `warp` is the vocal-tract factor the utterance should be normalized with:
/// resonances sit at `centre / warp`, so `warp < 1` gives a short,
/// child-like tract with raised formants.
pub fn synth_utterance<R: Rng>(warp: f64, n_vowels: usize, rate: u32, rng: &mut R) -> Result<Waveform> {
    if !(warp > 0.0) {
        return Err(Error::InvalidArgument(format!("warp {warp} must be positive")));
    }
    let f0 = rng.gen_range(100.0..180.0);
    let mut samples = Vec::new();
    for _ in 0..n_vowels.max(1) {
        let vowel = &VOWELS[rng.gen_range(0..VOWELS.len())];
        let dur = rng.gen_range(0.25..0.4);
        let seg = synth_formants(f0, vowel, dur, rate, 1.0 / warp)?;
        samples.extend(seg.samples);
    }
    Waveform::new(samples, rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rustfft::num_complex::Complex;
    use rustfft::FftPlanner;

    /// Frequency of the strongest bin of a Hann-windowed FFT.
    fn peak_freq(w: &Waveform, lo_hz: f64, hi_hz: f64) -> f64 {
        let n = 8192;
        let mut buf: Vec<Complex<f64>> = (0..n)
            .map(|i| {
                let s = w.samples.get(i).copied().unwrap_or(0.0) as f64;
                let win = 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos();
                Complex::new(s * win, 0.0)
            })
            .collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let bin_hz = w.sample_rate as f64 / n as f64;
        let (lo, hi) = ((lo_hz / bin_hz) as usize, (hi_hz / bin_hz) as usize);
        let k = (lo..hi)
            .max_by(|&a, &b| buf[a].norm_sqr().total_cmp(&buf[b].norm_sqr()))
            .unwrap();
        k as f64 * bin_hz
    }

    #[test]
    fn deterministic() {
        let a = synth_formants(120.0, &VOWELS[2], 0.5, 16000, 1.0).unwrap();
        let b = synth_formants(120.0, &VOWELS[2], 0.5, 16000, 1.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn duration_scales_sample_count() {
        let a = synth_formants(120.0, &VOWELS[0], 0.5, 16000, 1.0).unwrap();
        let b = synth_formants(120.0, &VOWELS[0], 1.0, 16000, 1.0).unwrap();
        assert_eq!(a.len(), 8000);
        assert_eq!(b.len(), 2 * a.len());
    }

    #[test]
    fn envelope_peak_follows_scaled_first_formant() {
        // Single resonance so the spectral peak is the nearest harmonic of f0.
        let f0 = 100.0;
        for scale in [0.85, 1.0, 1.2] {
            let w = synth_formants(f0, &[(700.0, 80.0)], 1.0, 16000, scale).unwrap();
            let peak = peak_freq(&w, 200.0, 2000.0);
            assert!((peak - 700.0 * scale).abs() <= f0 / 2.0 + 2.0, "scale {scale}: {peak}");
        }
    }

    #[test]
    fn formant_above_nyquist_rejected() {
        assert!(synth_formants(100.0, &[(7000.0, 100.0)], 0.1, 16000, 1.2).is_err());
    }

    #[test]
    fn utterances_are_seeded() {
        let a = synth_utterance(0.9, 3, 16000, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = synth_utterance(0.9, 3, 16000, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a, b);
        assert!(a.samples.iter().all(|s| s.abs() <= PEAK));
    }
}
