use std::f64::consts::PI;

use super::{log_mel, FeatureKind, FeatureMatrix, FrameConfig, MfccConfig, Waveform};
use crate::{Error, Result};

/// Orthonormal DCT-II basis, `n_ceps` rows of length `n_mels`.
pub fn dct_matrix(n_ceps: usize, n_mels: usize) -> Vec<f64> {
    let n = n_mels as f64;
    let mut out = Vec::with_capacity(n_ceps * n_mels);
    for k in 0..n_ceps {
        let scale = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
        for j in 0..n_mels {
            out.push(scale * (PI * k as f64 * (2 * j + 1) as f64 / (2.0 * n)).cos());
        }
    }
    out
}

/// Cepstra of an existing log-mel matrix.
pub fn mfcc_from_log_mel(
    log_mel: &FeatureMatrix,
    n_ceps: usize,
    mean_norm: bool,
) -> Result<FeatureMatrix> {
    let n_mels = log_mel.dim();
    if n_ceps == 0 || n_ceps > n_mels {
        return Err(Error::Config(format!(
            "n_ceps must be in 1..={n_mels}, got {n_ceps}"
        )));
    }
    let dct = dct_matrix(n_ceps, n_mels);
    let mut ceps = vec![0.0f64; log_mel.n_frames() * n_ceps];
    for (row, out) in log_mel.rows().zip(ceps.chunks_exact_mut(n_ceps)) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = dct[k * n_mels..(k + 1) * n_mels]
                .iter()
                .zip(row)
                .map(|(b, &v)| b * v as f64)
                .sum();
        }
    }
    if mean_norm && log_mel.n_frames() > 0 {
        let frames = log_mel.n_frames() as f64;
        for k in 0..n_ceps {
            let mean = ceps.iter().skip(k).step_by(n_ceps).sum::<f64>() / frames;
            ceps.iter_mut().skip(k).step_by(n_ceps).for_each(|v| *v -= mean);
        }
    }
    FeatureMatrix::new(
        ceps.into_iter().map(|v| v as f32).collect(),
        log_mel.n_frames(),
        n_ceps,
        FeatureKind::Mfcc,
        log_mel.frame_shift_ms,
        log_mel.source_rate,
    )
}

/// MFCC features with VTLN warp `alpha` applied in the mel stage.
pub fn mfcc(
    wave: &Waveform,
    frame: &FrameConfig,
    cfg: &MfccConfig,
    alpha: f64,
) -> Result<FeatureMatrix> {
    if cfg.n_ceps > cfg.mel.n_mels {
        return Err(Error::Config(format!(
            "n_ceps {} exceeds n_mels {}",
            cfg.n_ceps, cfg.mel.n_mels
        )));
    }
    let lm = log_mel(wave, frame, &cfg.mel, alpha)?;
    mfcc_from_log_mel(&lm, cfg.n_ceps, cfg.mean_norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::MelConfig;

    fn noise_wave(n: usize) -> Waveform {
        // Deterministic LCG noise with a slow envelope.
        let mut state = 12345u64;
        let samples = (0..n)
            .map(|i| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let u = (state >> 33) as f64 / (1u64 << 31) as f64 - 0.5;
                (u * (0.2 + 0.1 * (i as f64 / 800.0).sin())) as f32
            })
            .collect();
        Waveform::new(samples, 16000).unwrap()
    }

    #[test]
    fn dimension_contract() {
        let w = noise_wave(8000);
        let f = mfcc(&w, &FrameConfig::default(), &MfccConfig::default(), 1.0).unwrap();
        assert_eq!(f.dim(), 13);
        assert_eq!(f.kind, FeatureKind::Mfcc);
        assert!(f.is_finite());
    }

    #[test]
    fn constant_row_maps_to_c0_only() {
        let c = -3.25f32;
        let lm = FeatureMatrix::new(vec![c; 23], 1, 23, FeatureKind::LogMel, 10.0, 16000).unwrap();
        let ceps = mfcc_from_log_mel(&lm, 23, false).unwrap();
        assert!((ceps.get(0, 0) as f64 - c as f64 * 23f64.sqrt()).abs() < 1e-5);
        for k in 1..23 {
            assert!(ceps.get(0, k).abs() < 1e-5, "coef {k}");
        }
    }

    #[test]
    fn full_dct_inverts_to_log_mel() {
        let w = noise_wave(8000);
        let mel = MelConfig::with_mels(23);
        let lm = log_mel(&w, &FrameConfig::default(), &mel, 1.0).unwrap();
        let ceps = mfcc_from_log_mel(&lm, 23, false).unwrap();
        // Inverse of an orthonormal DCT-II is its transpose.
        let basis = dct_matrix(23, 23);
        for t in 0..lm.n_frames() {
            for j in 0..23 {
                let rec: f64 = (0..23).map(|k| basis[k * 23 + j] * ceps.get(t, k) as f64).sum();
                assert!((rec - lm.get(t, j) as f64).abs() < 1e-5, "frame {t} channel {j}");
            }
        }
    }

    #[test]
    fn mean_norm_zeroes_column_means() {
        let w = noise_wave(8000);
        let cfg = MfccConfig {
            mean_norm: true,
            ..MfccConfig::default()
        };
        let f = mfcc(&w, &FrameConfig::default(), &cfg, 1.0).unwrap();
        for k in 0..13 {
            let m: f64 = (0..f.n_frames()).map(|t| f.get(t, k) as f64).sum::<f64>() / f.n_frames() as f64;
            assert!(m.abs() < 1e-4);
        }
    }

    #[test]
    fn too_many_cepstra() {
        let w = noise_wave(8000);
        let cfg = MfccConfig {
            n_ceps: 30,
            ..MfccConfig::default()
        };
        assert!(matches!(mfcc(&w, &FrameConfig::default(), &cfg, 1.0), Err(Error::Config(_))));
    }
}
