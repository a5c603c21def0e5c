//! SpecAugment on log-mel matrices: time warping, frequency masks and time
//! masks.
//!
//! Masked cells are filled with the mean of the matrix being masked. Random
//! draws happen in a fixed order: warp pivot, warp displacement, then for
//! each mask its width followed by its start.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dsp::{FeatureKind, FeatureMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpecAugPolicy {
    /// Largest time-mask width in frames (T).
    pub time_mask_max: usize,
    /// Largest frequency-mask width in channels (F).
    pub freq_mask_max: usize,
    pub n_time_masks: usize,
    pub n_freq_masks: usize,
    /// Largest pivot displacement of the time warp in frames (W).
    pub time_warp_max: usize,
    pub seed: u64,
}

impl Default for SpecAugPolicy {
    fn default() -> Self {
        Self {
            time_mask_max: 40,
            freq_mask_max: 30,
            n_time_masks: 2,
            n_freq_masks: 2,
            time_warp_max: 5,
            seed: 0,
        }
    }
}

impl SpecAugPolicy {
    /// A policy that leaves every matrix unchanged.
    pub fn identity() -> Self {
        Self {
            time_mask_max: 0,
            freq_mask_max: 0,
            n_time_masks: 0,
            n_freq_masks: 0,
            time_warp_max: 0,
            seed: 0,
        }
    }

    /// Per-utterance RNG stream derived from the policy seed and the id.
    pub fn utterance_rng(&self, utt_id: &str) -> ChaCha8Rng {
        // FNV-1a keeps the stream independent of std's hasher.
        let mut h: u64 = 0xcbf29ce484222325;
        for b in utt_id.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        ChaCha8Rng::seed_from_u64(self.seed ^ h)
    }
}

/// A masked band `[start, start + width)` along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mask {
    pub start: usize,
    pub width: usize,
}

/// What [`spec_augment_traced`] did to a matrix.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AugmentTrace {
    /// `(pivot, displacement)` of the time warp, if one was applied.
    pub warp: Option<(usize, i64)>,
    pub freq_masks: Vec<Mask>,
    pub time_masks: Vec<Mask>,
    pub fill: f32,
}

fn require_log_mel(feat: &FeatureMatrix) -> Result<()> {
    if feat.kind != FeatureKind::LogMel {
        return Err(Error::InvalidArgument(format!(
            "SpecAugment expects log-mel features, got {:?}",
            feat.kind
        )));
    }
    Ok(())
}

fn draw_masks<R: Rng>(count: usize, max_width: usize, extent: usize, rng: &mut R) -> Vec<Mask> {
    (0..count)
        .map(|_| {
            let width = rng.gen_range(0..=max_width);
            let start = rng.gen_range(0..=extent - width);
            Mask { start, width }
        })
        .collect()
}

fn apply_freq_masks(feat: &mut FeatureMatrix, masks: &[Mask], fill: f32) {
    for t in 0..feat.n_frames() {
        let row = feat.row_mut(t);
        for m in masks {
            row[m.start..m.start + m.width].fill(fill);
        }
    }
}

fn apply_time_masks(feat: &mut FeatureMatrix, masks: &[Mask], fill: f32) {
    for m in masks {
        for t in m.start..m.start + m.width {
            feat.row_mut(t).fill(fill);
        }
    }
}

fn check_freq_bound(feat: &FeatureMatrix, policy: &SpecAugPolicy) -> Result<()> {
    if policy.n_freq_masks > 0 && policy.freq_mask_max > feat.dim() {
        return Err(Error::InvalidArgument(format!(
            "frequency mask bound F={} exceeds feature dim {}",
            policy.freq_mask_max,
            feat.dim()
        )));
    }
    Ok(())
}

/// Masks `n_freq_masks` bands of consecutive channels.
pub fn freq_mask<R: Rng>(feat: &FeatureMatrix, policy: &SpecAugPolicy, rng: &mut R) -> Result<FeatureMatrix> {
    require_log_mel(feat)?;
    check_freq_bound(feat, policy)?;
    let fill = feat.mean();
    let masks = draw_masks(policy.n_freq_masks, policy.freq_mask_max, feat.dim(), rng);
    let mut out = feat.clone();
    apply_freq_masks(&mut out, &masks, fill);
    Ok(out)
}

/// Masks `n_time_masks` runs of consecutive frames, each at most
/// `min(T, n_frames)` wide.
pub fn time_mask<R: Rng>(feat: &FeatureMatrix, policy: &SpecAugPolicy, rng: &mut R) -> Result<FeatureMatrix> {
    require_log_mel(feat)?;
    let fill = feat.mean();
    let bound = policy.time_mask_max.min(feat.n_frames());
    let masks = draw_masks(policy.n_time_masks, bound, feat.n_frames(), rng);
    let mut out = feat.clone();
    apply_time_masks(&mut out, &masks, fill);
    Ok(out)
}

/// Moves a random pivot frame by up to `W` frames and linearly resamples the
/// two sides, keeping the first and last frames in place.
pub fn time_warp<R: Rng>(feat: &FeatureMatrix, policy: &SpecAugPolicy, rng: &mut R) -> Result<FeatureMatrix> {
    require_log_mel(feat)?;
    Ok(warp_inner(feat, policy.time_warp_max, rng).0)
}

fn warp_inner<R: Rng>(feat: &FeatureMatrix, w: usize, rng: &mut R) -> (FeatureMatrix, Option<(usize, i64)>) {
    let n = feat.n_frames();
    if w == 0 {
        return (feat.clone(), None);
    }
    if n <= 2 * w {
        log::debug!("time warp skipped: {n} frames <= 2 * W ({w})");
        return (feat.clone(), None);
    }
    let pivot = rng.gen_range(w..n - w);
    let shift = rng.gen_range(-(w as i64)..=w as i64);
    let dest = (pivot as i64 + shift) as usize;
    let last = n - 1;

    let dim = feat.dim();
    let mut data = Vec::with_capacity(n * dim);
    for t in 0..n {
        let src = if t <= dest {
            if dest == 0 {
                0.0
            } else {
                t as f64 * pivot as f64 / dest as f64
            }
        } else {
            pivot as f64 + (t - dest) as f64 * (last - pivot) as f64 / (last - dest) as f64
        };
        let lo = (src.floor() as usize).min(last);
        let hi = (lo + 1).min(last);
        let frac = (src - lo as f64) as f32;
        let (a, b) = (feat.row(lo), feat.row(hi));
        if frac == 0.0 {
            data.extend_from_slice(a);
        } else {
            data.extend(a.iter().zip(b).map(|(&x, &y)| x + frac * (y - x)));
        }
    }
    let out = feat.with_data(data).expect("shape preserved");
    (out, Some((pivot, shift)))
}

/// Time warp, then frequency masks, then time masks, from one RNG stream.
pub fn spec_augment<R: Rng>(feat: &FeatureMatrix, policy: &SpecAugPolicy, rng: &mut R) -> Result<FeatureMatrix> {
    spec_augment_traced(feat, policy, rng).map(|(m, _)| m)
}

pub fn spec_augment_traced<R: Rng>(
    feat: &FeatureMatrix,
    policy: &SpecAugPolicy,
    rng: &mut R,
) -> Result<(FeatureMatrix, AugmentTrace)> {
    require_log_mel(feat)?;
    check_freq_bound(feat, policy)?;
    let (mut out, warp) = warp_inner(feat, policy.time_warp_max, rng);
    let fill = out.mean();
    let freq_masks = draw_masks(policy.n_freq_masks, policy.freq_mask_max, out.dim(), rng);
    apply_freq_masks(&mut out, &freq_masks, fill);
    let bound = policy.time_mask_max.min(out.n_frames());
    let time_masks = draw_masks(policy.n_time_masks, bound, out.n_frames(), rng);
    apply_time_masks(&mut out, &time_masks, fill);
    Ok((
        out,
        AugmentTrace {
            warp,
            freq_masks,
            time_masks,
            fill,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_matrix(n: usize, d: usize, seed: u64) -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..n * d).map(|_| rng.gen_range(-10.0f32..5.0)).collect();
        FeatureMatrix::new(data, n, d, FeatureKind::LogMel, 10.0, 16000).unwrap()
    }

    #[test]
    fn zero_counts_are_identity() {
        let m = random_matrix(50, 80, 1);
        let mut p = SpecAugPolicy::default();
        p.n_freq_masks = 0;
        p.n_time_masks = 0;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(freq_mask(&m, &p, &mut rng).unwrap(), m);
        assert_eq!(time_mask(&m, &p, &mut rng).unwrap(), m);
        let id = SpecAugPolicy::identity();
        assert_eq!(spec_augment(&m, &id, &mut rng).unwrap(), m);
    }

    #[test]
    fn freq_masks_fill_only_their_channels() {
        let m = random_matrix(30, 80, 2);
        let p = SpecAugPolicy::default();
        let fill = m.mean();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let out = freq_mask(&m, &p, &mut rng).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let masks = draw_masks(p.n_freq_masks, p.freq_mask_max, 80, &mut rng);
        for t in 0..30 {
            for d in 0..80 {
                let masked = masks.iter().any(|k| (k.start..k.start + k.width).contains(&d));
                let want = if masked { fill } else { m.get(t, d) };
                assert_eq!(out.get(t, d), want);
            }
        }
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let m = random_matrix(120, 80, 4);
        let p = SpecAugPolicy::default();
        let a = spec_augment(&m, &p, &mut p.utterance_rng("u1")).unwrap();
        let b = spec_augment(&m, &p, &mut p.utterance_rng("u1")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn time_masks_respect_bound() {
        let p = SpecAugPolicy::default();
        for seed in 0..200 {
            let m = random_matrix(60, 40, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (_, trace) = spec_augment_traced(&m, &p, &mut rng).unwrap();
            let total: usize = trace.time_masks.iter().map(|k| k.width).sum();
            assert!(trace.time_masks.iter().all(|k| k.width <= 40 && k.start + k.width <= 60));
            assert!(total <= p.n_time_masks * p.time_mask_max);
        }
        // Bound shrinks to the utterance length.
        let m = random_matrix(10, 40, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (_, trace) = spec_augment_traced(&m, &p, &mut rng).unwrap();
        assert!(trace.time_masks.iter().all(|k| k.start + k.width <= 10));
    }

    #[test]
    fn freq_bound_larger_than_dim_is_error() {
        let m = random_matrix(10, 20, 1);
        let p = SpecAugPolicy::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(freq_mask(&m, &p, &mut rng).is_err());
        assert!(spec_augment(&m, &p, &mut rng).is_err());
    }

    #[test]
    fn non_log_mel_rejected() {
        let mut m = random_matrix(10, 80, 1);
        m.kind = FeatureKind::Mfcc;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(spec_augment(&m, &SpecAugPolicy::default(), &mut rng).is_err());
    }

    #[test]
    fn time_warp_keeps_shape_and_endpoints() {
        let p = SpecAugPolicy {
            time_warp_max: 5,
            ..SpecAugPolicy::default()
        };
        for seed in 0..50 {
            let m = random_matrix(40, 8, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let out = time_warp(&m, &p, &mut rng).unwrap();
            assert_eq!(out.n_frames(), 40);
            assert_eq!(out.dim(), 8);
            assert_eq!(out.row(0), m.row(0));
            assert_eq!(out.row(39), m.row(39));
        }
    }

    #[test]
    fn time_warp_moves_pivot_frame() {
        let m = random_matrix(40, 3, 5);
        let p = SpecAugPolicy::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (out, warp) = warp_inner(&m, p.time_warp_max, &mut rng);
        let (pivot, shift) = warp.unwrap();
        let dest = (pivot as i64 + shift) as usize;
        assert_eq!(out.row(dest), m.row(pivot));
    }

    #[test]
    fn time_warp_degenerate_cases() {
        let m = random_matrix(10, 3, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let zero = SpecAugPolicy {
            time_warp_max: 0,
            ..SpecAugPolicy::default()
        };
        assert_eq!(time_warp(&m, &zero, &mut rng).unwrap(), m);
        let wide = SpecAugPolicy {
            time_warp_max: 5,
            ..SpecAugPolicy::default()
        };
        assert_eq!(time_warp(&m, &wide, &mut rng).unwrap(), m);
    }

    #[test]
    fn different_seeds_differ() {
        let p = SpecAugPolicy::default();
        let mut differing = 0;
        for s in 0..20 {
            let m = random_matrix(200, 80, 100 + s);
            let a = spec_augment(&m, &p, &mut ChaCha8Rng::seed_from_u64(2 * s)).unwrap();
            let b = spec_augment(&m, &p, &mut ChaCha8Rng::seed_from_u64(2 * s + 1)).unwrap();
            if a != b {
                differing += 1;
            }
        }
        assert!(differing >= 19, "only {differing} of 20 differed");
    }
}
