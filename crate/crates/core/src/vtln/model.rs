//! Model training, warp estimation and serialization.
//!
//! Model file layout, little-endian:
//!
//! ```text
//! magic       5 bytes "VTLN1"
//! grid        f64 alpha_min, f64 alpha_max, f64 step
//! frontend    u32 length, TOML text
//! gmm         u32 K, u32 dim, K f64 weights, K*dim f64 means, K*dim f64 variances
//! transforms  u32 count, then per grid point: dim*dim f64 A (row-major), dim f64 b
//! ```

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gmm::{refine_gmm, train_gmm, DiagGmm, GmmTrainConfig};
use super::transform::{AffineTransform, RegressionStats};
use super::WarpGrid;
use crate::dsp::{
    log_mel_from_power, mfcc_from_log_mel, power_spectrum, FeatureMatrix, FrameConfig, MelConfig, MelFilterbank,
    MfccConfig, Waveform,
};
use crate::fsutil::write_atomic;
use crate::{Error, Result};

pub const MODEL_MAGIC: &[u8; 5] = b"VTLN1";

/// Front-end settings the model's MFCCs were computed with.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Frontend {
    pub frame: FrameConfig,
    pub mfcc: MfccConfig,
}

impl Frontend {
    /// Unwarped MFCCs in the layout the model scores.
    pub fn features(&self, wave: &Waveform) -> Result<FeatureMatrix> {
        apply_warp(
            wave,
            1.0,
            &FeatureSpec::Mfcc {
                frame: self.frame.clone(),
                mfcc: self.mfcc.clone(),
            },
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VtlnConfig {
    pub grid: WarpGrid,
    pub components: usize,
    pub em_iters: usize,
    pub outer_iters: usize,
    /// Ridge weight per training frame.
    pub ridge_per_frame: f64,
    pub var_floor_frac: f64,
    /// Shift training assignments to mean 1.0 before each GMM update, which
    /// makes the average training speaker the reference.
    pub recenter: bool,
    pub seed: u64,
}

impl Default for VtlnConfig {
    fn default() -> Self {
        Self {
            grid: WarpGrid::default(),
            components: 64,
            em_iters: 10,
            outer_iters: 2,
            ridge_per_frame: 1e-6,
            var_floor_frac: 0.01,
            recenter: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedWave {
    pub id: String,
    pub wave: Waveform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarpAssignment {
    pub utt_id: String,
    pub alpha: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VtlnModel {
    pub grid: WarpGrid,
    pub gmm: DiagGmm,
    /// One per grid value, in grid order.
    pub transforms: Vec<AffineTransform>,
    pub frontend: Frontend,
}

impl VtlnModel {
    pub fn new(grid: WarpGrid, gmm: DiagGmm, transforms: Vec<AffineTransform>, frontend: Frontend) -> Result<Self> {
        let n = grid.values()?.len();
        if transforms.len() != n {
            return Err(Error::ModelFormat(format!(
                "{} transforms for a {n}-point grid",
                transforms.len()
            )));
        }
        if let Some(t) = transforms.iter().find(|t| t.dim() != gmm.dim()) {
            return Err(Error::ModelFormat(format!(
                "transform dim {} differs from GMM dim {}",
                t.dim(),
                gmm.dim()
            )));
        }
        if frontend.mfcc.n_ceps != gmm.dim() {
            return Err(Error::ModelFormat(format!(
                "front end yields {} cepstra but the GMM has dim {}",
                frontend.mfcc.n_ceps,
                gmm.dim()
            )));
        }
        Ok(Self {
            grid,
            gmm,
            transforms,
            frontend,
        })
    }

    pub fn dim(&self) -> usize {
        self.gmm.dim()
    }

    pub fn transform_at(&self, alpha: f64) -> Option<&AffineTransform> {
        self.grid.index_of(alpha).map(|i| &self.transforms[i])
    }
}

/// Output features of [`apply_warp`].
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureSpec {
    LogMel { frame: FrameConfig, mel: MelConfig },
    Mfcc { frame: FrameConfig, mfcc: MfccConfig },
}

/// Re-extracts features with the filterbank warped by `alpha`.
pub fn apply_warp(wave: &Waveform, alpha: f64, spec: &FeatureSpec) -> Result<FeatureMatrix> {
    if !(0.8 - 1e-9..=1.2 + 1e-9).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("warp factor {alpha} outside [0.8, 1.2]")));
    }
    match spec {
        FeatureSpec::LogMel { frame, mel } => crate::dsp::log_mel(wave, frame, mel, alpha),
        FeatureSpec::Mfcc { frame, mfcc } => crate::dsp::mfcc(wave, frame, mfcc, alpha),
    }
}

fn to_f64(feat: &FeatureMatrix) -> Vec<f64> {
    feat.data().iter().map(|&v| v as f64).collect()
}

/// Objective of every grid point, with or without the log-determinant term.
pub fn warp_scores(frames: &[f64], model: &VtlnModel, jacobian: bool) -> Result<Vec<f64>> {
    let d = model.dim();
    if frames.len() % d != 0 {
        return Err(Error::Dimension {
            expected: d,
            got: frames.len(),
        });
    }
    let t = (frames.len() / d) as f64;
    let mut y = vec![0.0; d];
    Ok(model
        .transforms
        .iter()
        .map(|tr| {
            let ll: f64 = frames
                .chunks_exact(d)
                .map(|x| {
                    tr.apply(x, &mut y);
                    model.gmm.log_likelihood(&y)
                })
                .sum();
            if jacobian {
                ll + t * tr.log_det()
            } else {
                ll
            }
        })
        .collect())
}

/// Picks the best grid point; ties go to the value nearest 1.0, then the
/// smaller one.
fn best_alpha(values: &[f64], scores: &[f64]) -> (f64, f64) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        (values[a] - 1.0)
            .abs()
            .total_cmp(&(values[b] - 1.0).abs())
            .then(values[a].total_cmp(&values[b]))
    });
    let mut best = order[0];
    for &i in &order[1..] {
        let tol = 1e-9 * scores[best].abs().max(1.0);
        if scores[i] > scores[best] + tol {
            best = i;
        }
    }
    (values[best], scores[best])
}

fn estimate_frames(utt_id: &str, frames: &[f64], model: &VtlnModel) -> Result<WarpAssignment> {
    let values = model.grid.values()?;
    let scores = warp_scores(frames, model, true)?;
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Numeric(format!("non-finite warp score for {utt_id}")));
    }
    let (alpha, score) = best_alpha(&values, &scores);
    Ok(WarpAssignment {
        utt_id: utt_id.to_string(),
        alpha,
        score,
    })
}

/// Grid search for the warp factor of one utterance given its unwarped
/// MFCCs.
pub fn estimate_warp(utt_id: &str, features: &FeatureMatrix, model: &VtlnModel) -> Result<WarpAssignment> {
    if features.dim() != model.dim() {
        return Err(Error::Dimension {
            expected: model.dim(),
            got: features.dim(),
        });
    }
    if features.n_frames() == 0 {
        return Err(Error::InvalidArgument(format!("utterance {utt_id} has no frames")));
    }
    estimate_frames(utt_id, &to_f64(features), model)
}

/// A trained model and the final per-utterance assignments of its training
/// corpus.
#[derive(Debug, Clone)]
pub struct VtlnTraining {
    pub model: VtlnModel,
    pub assignments: Vec<WarpAssignment>,
}

struct UttStats {
    base: Vec<f64>,
    per_alpha: Vec<RegressionStats>,
}

/// Unwarped MFCCs plus regression statistics against every warped version.
fn utterance_stats(wave: &Waveform, frontend: &Frontend, alphas: &[f64]) -> Result<UttStats> {
    let power = power_spectrum(wave, &frontend.frame)?;
    let mfcc_at = |alpha: f64| -> Result<Vec<f64>> {
        let fb = MelFilterbank::new(&frontend.mfcc.mel, &frontend.frame, wave.sample_rate, alpha)?;
        let lm = log_mel_from_power(&power, &fb)?;
        Ok(to_f64(&mfcc_from_log_mel(&lm, frontend.mfcc.n_ceps, frontend.mfcc.mean_norm)?))
    };
    let base = mfcc_at(1.0)?;
    let mut per_alpha = Vec::with_capacity(alphas.len());
    for &a in alphas {
        let warped = mfcc_at(a)?;
        let mut st = RegressionStats::new(frontend.mfcc.n_ceps);
        st.accumulate(&base, &warped)?;
        per_alpha.push(st);
    }
    Ok(UttStats { base, per_alpha })
}

/// Trains the GMM and per-warp transforms on a corpus.
///
/// Transforms map unwarped MFCCs onto MFCCs extracted with each warped
/// filterbank. A single Gaussian on unwarped features gives the first
/// assignments; each of the `outer_iters` rounds then re-estimates a larger
/// GMM on features normalized with the current assignments.
pub fn train_vtln(corpus: &[NamedWave], frontend: &Frontend, cfg: &VtlnConfig) -> Result<VtlnTraining> {
    if corpus.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} utterances; VTLN training needs at least 2",
            corpus.len()
        )));
    }
    let alphas = cfg.grid.values()?;
    let dim = frontend.mfcc.n_ceps;

    let stats: Vec<UttStats> = corpus
        .par_iter()
        .map(|u| utterance_stats(&u.wave, frontend, &alphas))
        .collect::<Result<_>>()?;

    let mut pooled: Vec<RegressionStats> = alphas.iter().map(|_| RegressionStats::new(dim)).collect();
    for s in &stats {
        for (p, st) in pooled.iter_mut().zip(&s.per_alpha) {
            p.merge(st);
        }
    }
    let n_frames = pooled[0].frames();
    let ridge = cfg.ridge_per_frame * n_frames as f64;
    let transforms = alphas
        .iter()
        .zip(&pooled)
        .map(|(a, p)| {
            p.solve(ridge).map_err(|e| match e {
                Error::Numeric(m) => Error::Numeric(format!("warp factor {a}: {m}")),
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let base: Vec<f64> = stats.iter().flat_map(|s| s.base.iter().copied()).collect();
    let gmm_cfg = |components: usize| GmmTrainConfig {
        components,
        iterations: cfg.em_iters,
        seed: cfg.seed,
        var_floor_frac: cfg.var_floor_frac,
    };
    let first = if cfg.outer_iters == 0 { cfg.components } else { 1 };
    let fit = train_gmm(&base, dim, &gmm_cfg(first))?;
    let mut model = VtlnModel::new(cfg.grid.clone(), fit.gmm, transforms, frontend.clone())?;

    let assign = |model: &VtlnModel| -> Result<Vec<WarpAssignment>> {
        corpus
            .par_iter()
            .zip(&stats)
            .map(|(u, s)| estimate_frames(&u.id, &s.base, model))
            .collect()
    };

    for round in 1..=cfg.outer_iters {
        let mut assignments = assign(&model)?;
        if cfg.recenter {
            recenter(&mut assignments, &alphas);
        }
        let normalized: Vec<f64> = assignments
            .iter()
            .zip(&stats)
            .flat_map(|(a, s)| {
                let idx = model.grid.index_of(a.alpha).expect("assignment is a grid member");
                model.transforms[idx].apply_frames(&s.base)
            })
            .collect();
        let k = mixture_size(cfg.components, round, cfg.outer_iters);
        let fit = if k == model.gmm.n_components() {
            refine_gmm(&model.gmm, &normalized, cfg.em_iters, cfg.var_floor_frac)?
        } else {
            train_gmm(&normalized, dim, &gmm_cfg(k))?
        };
        log::info!(
            "vtln round {round}: {k} components, normalized log-likelihood {:.3} per frame",
            fit.log_likelihoods.last().copied().unwrap_or(f64::NAN) / n_frames as f64
        );
        model.gmm = fit.gmm;
    }
    let assignments = assign(&model)?;
    Ok(VtlnTraining { model, assignments })
}

/// Components used in outer round `round` of `rounds`: grows geometrically
/// from one to `target`. A single broad Gaussian orders speakers by warp
/// before finer components can latch onto speaker-specific clusters.
fn mixture_size(target: usize, round: usize, rounds: usize) -> usize {
    let k = (target as f64).powf(round as f64 / rounds as f64).round() as usize;
    k.clamp(1, target)
}

/// Moves every assignment by the same offset so the mean is 1.0, snapping
/// to the grid.
fn recenter(assignments: &mut [WarpAssignment], alphas: &[f64]) {
    let mean = assignments.iter().map(|a| a.alpha).sum::<f64>() / assignments.len() as f64;
    let shift = 1.0 - mean;
    for a in assignments.iter_mut() {
        let target = a.alpha + shift;
        a.alpha = *alphas
            .iter()
            .min_by(|x, y| (*x - target).abs().total_cmp(&(*y - target).abs()))
            .unwrap();
    }
}

fn put_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u32).to_le_bytes());
}

fn put_f64s(out: &mut Vec<u8>, v: &[f64]) {
    v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes()));
}

impl VtlnModel {
    pub fn encode(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        out.extend_from_slice(MODEL_MAGIC);
        put_f64s(&mut out, &[self.grid.alpha_min, self.grid.alpha_max, self.grid.step]);
        let fe = toml::to_string(&self.frontend).map_err(|e| Error::ModelFormat(e.to_string()))?;
        put_u32(&mut out, fe.len());
        out.extend_from_slice(fe.as_bytes());
        put_u32(&mut out, self.gmm.n_components());
        put_u32(&mut out, self.dim());
        put_f64s(&mut out, self.gmm.weights());
        put_f64s(&mut out, self.gmm.means());
        put_f64s(&mut out, self.gmm.vars());
        put_u32(&mut out, self.transforms.len());
        for t in &self.transforms {
            put_f64s(&mut out, t.matrix());
            put_f64s(&mut out, t.offset());
        }
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < MODEL_MAGIC.len() || &bytes[..MODEL_MAGIC.len()] != MODEL_MAGIC {
            return Err(Error::ModelFormat("bad magic bytes; not a VTLN1 model".into()));
        }
        let mut r = Reader {
            bytes,
            pos: MODEL_MAGIC.len(),
        };
        let g = r.f64s(3)?;
        let grid = WarpGrid {
            alpha_min: g[0],
            alpha_max: g[1],
            step: g[2],
        };
        let fe_len = r.u32()?;
        let fe_text = std::str::from_utf8(r.take(fe_len)?)
            .map_err(|_| Error::ModelFormat("front-end block is not UTF-8".into()))?;
        let frontend: Frontend = toml::from_str(fe_text).map_err(|e| Error::ModelFormat(e.to_string()))?;
        let k = r.u32()?;
        let dim = r.u32()?;
        let weights = r.f64s(k)?;
        let means = r.f64s(k * dim)?;
        let vars = r.f64s(k * dim)?;
        let gmm = DiagGmm::new(dim, weights, means, vars)?;
        let n_t = r.u32()?;
        let mut transforms = Vec::with_capacity(n_t.min(1024));
        for _ in 0..n_t {
            let a = r.f64s(dim * dim)?;
            let b = r.f64s(dim)?;
            transforms.push(AffineTransform::new(dim, a, b).map_err(|e| Error::ModelFormat(e.to_string()))?);
        }
        if r.pos != bytes.len() {
            return Err(Error::ModelFormat(format!(
                "{} trailing bytes after model",
                bytes.len() - r.pos
            )));
        }
        VtlnModel::new(grid, gmm, transforms, frontend)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::ModelFormat(format!("model truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(n.checked_mul(8).ok_or_else(|| Error::ModelFormat("size overflow".into()))?)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn write_model(path: &Path, model: &VtlnModel) -> Result<()> {
    write_atomic(path, &model.encode()?)
}

pub fn read_model(path: &Path) -> Result<VtlnModel> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    VtlnModel::decode(&bytes).map_err(|e| match e {
        Error::ModelFormat(m) => Error::ModelFormat(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// `utt_id<TAB>alpha<TAB>score` lines.
pub fn render_assignments(assignments: &[WarpAssignment]) -> String {
    let mut out = String::from("utt_id\talpha\tscore\n");
    for a in assignments {
        out.push_str(&format!("{}\t{:.2}\t{:.4}\n", a.utt_id, a.alpha, a.score));
    }
    out
}

pub fn parse_assignments(text: &str, origin: &str) -> Result<Vec<WarpAssignment>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') || (i == 0 && line.starts_with("utt_id\t")) {
            continue;
        }
        let bad = |msg: String| Error::Manifest {
            path: origin.into(),
            line: i + 1,
            msg,
        };
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(bad(format!("expected 3 tab-separated columns, found {}", cols.len())));
        }
        let alpha = cols[1].parse().map_err(|_| bad(format!("bad alpha '{}'", cols[1])))?;
        let score = cols[2].parse().map_err(|_| bad(format!("bad score '{}'", cols[2])))?;
        out.push(WarpAssignment {
            utt_id: cols[0].to_string(),
            alpha,
            score,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::synth::synth_utterance;
    use crate::dsp::{log_mel, mfcc};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn corpus(seed: u64, per_scale: usize) -> Vec<(f64, NamedWave)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        for i in 0..per_scale {
            for s in [0.85, 1.0, 1.15] {
                let wave = synth_utterance(s, 5, 16000, &mut rng).unwrap();
                out.push((
                    s,
                    NamedWave {
                        id: format!("utt{i}-{s}"),
                        wave,
                    },
                ));
            }
        }
        out
    }

    fn small_cfg() -> VtlnConfig {
        VtlnConfig {
            components: 4,
            outer_iters: 2,
            ..Default::default()
        }
    }

    fn trained() -> (VtlnTraining, Vec<(f64, NamedWave)>) {
        let c = corpus(11, 4);
        let waves: Vec<NamedWave> = c.iter().map(|(_, w)| w.clone()).collect();
        (train_vtln(&waves, &Frontend::default(), &small_cfg()).unwrap(), c)
    }

    #[test]
    fn reference_transform_is_identity() {
        let (t, _) = trained();
        assert!(t.model.transform_at(1.0).unwrap().distance_from_identity() < 1e-3);
        assert_eq!(t.model.transforms.len(), 21);
    }

    #[test]
    fn reference_score_is_plain_likelihood() {
        let (t, c) = trained();
        let fe = &t.model.frontend;
        let feats = fe.features(&c[0].1.wave).unwrap();
        let frames = to_f64(&feats);
        let scores = warp_scores(&frames, &t.model, true).unwrap();
        let plain = t.model.gmm.total_log_likelihood(&frames);
        let idx = t.model.grid.index_of(1.0).unwrap();
        assert!((scores[idx] - plain).abs() < 1e-3 * feats.n_frames() as f64);
    }

    #[test]
    fn jacobian_term_matters() {
        let (t, c) = trained();
        let frames = to_f64(&t.model.frontend.features(&c[1].1.wave).unwrap());
        let with = warp_scores(&frames, &t.model, true).unwrap();
        let without = warp_scores(&frames, &t.model, false).unwrap();
        let differing = with.iter().zip(&without).filter(|(a, b)| a != b).count();
        assert!(differing >= with.len() - 1, "{differing}");
    }

    #[test]
    fn estimates_are_grid_members_and_deterministic() {
        let (t, c) = trained();
        let values = t.model.grid.values().unwrap();
        for (_, w) in &c {
            let f = t.model.frontend.features(&w.wave).unwrap();
            let a = estimate_warp(&w.id, &f, &t.model).unwrap();
            let b = estimate_warp(&w.id, &f, &t.model).unwrap();
            assert_eq!(a, b);
            assert!(values.contains(&a.alpha));
        }
    }

    #[test]
    fn training_is_deterministic() {
        let (a, _) = trained();
        let (b, _) = trained();
        assert_eq!(a.model, b.model);
        assert_eq!(a.assignments, b.assignments);
    }

    #[test]
    fn identical_copies_share_a_warp() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let wave = synth_utterance(1.0, 8, 16000, &mut rng).unwrap();
        let waves: Vec<NamedWave> = (0..3)
            .map(|i| NamedWave {
                id: format!("copy{i}"),
                wave: wave.clone(),
            })
            .collect();
        let cfg = VtlnConfig {
            components: 2,
            ..small_cfg()
        };
        let t = train_vtln(&waves, &Frontend::default(), &cfg).unwrap();
        assert!(t.assignments.iter().all(|a| a.alpha == t.assignments[0].alpha));
    }

    #[test]
    fn dimension_mismatch() {
        let (t, c) = trained();
        let lm = log_mel(&c[0].1.wave, &FrameConfig::default(), &MelConfig::with_mels(23), 1.0).unwrap();
        assert!(matches!(
            estimate_warp("x", &lm, &t.model),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn too_small_corpus() {
        let c = corpus(1, 1);
        assert!(matches!(
            train_vtln(&[c[0].1.clone()], &Frontend::default(), &small_cfg()),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn ties_prefer_reference_then_smaller() {
        let values = [0.98, 1.0, 1.02];
        assert_eq!(best_alpha(&values, &[5.0, 5.0, 5.0]).0, 1.0);
        assert_eq!(best_alpha(&values, &[6.0, 5.0, 6.0]).0, 0.98);
        assert_eq!(best_alpha(&values, &[5.0, 5.0, 6.0]).0, 1.02);
    }

    #[test]
    fn apply_warp_identity_and_framing() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let wave = synth_utterance(1.0, 2, 16000, &mut rng).unwrap();
        let frame = FrameConfig::default();
        let mel = MelConfig::default();
        let spec = FeatureSpec::LogMel {
            frame: frame.clone(),
            mel: mel.clone(),
        };
        let plain = {
            let fb = MelFilterbank::unwarped(&mel, &frame, 16000).unwrap();
            log_mel_from_power(&power_spectrum(&wave, &frame).unwrap(), &fb).unwrap()
        };
        let at_one = apply_warp(&wave, 1.0, &spec).unwrap();
        assert_eq!(plain.data(), at_one.data());
        for a in [0.8, 0.9, 1.1, 1.2] {
            assert_eq!(apply_warp(&wave, a, &spec).unwrap().n_frames(), plain.n_frames());
        }
        assert!(apply_warp(&wave, 1.25, &spec).is_err());
        let mf = MfccConfig::default();
        let m = apply_warp(&wave, 1.0, &FeatureSpec::Mfcc { frame: frame.clone(), mfcc: mf.clone() }).unwrap();
        assert_eq!(m.data(), mfcc(&wave, &frame, &mf, 1.0).unwrap().data());
    }

    #[test]
    fn model_round_trip() {
        let (t, _) = trained();
        let bytes = t.model.encode().unwrap();
        assert_eq!(&bytes[..5], MODEL_MAGIC);
        assert_eq!(VtlnModel::decode(&bytes).unwrap(), t.model);
        assert!(VtlnModel::decode(&bytes[..bytes.len() - 3]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(VtlnModel::decode(&bad), Err(Error::ModelFormat(_))));
        let mut long = bytes;
        long.push(0);
        assert!(VtlnModel::decode(&long).is_err());
    }

    #[test]
    fn model_file_round_trip() {
        let (t, _) = trained();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.vtln");
        write_model(&p, &t.model).unwrap();
        assert_eq!(read_model(&p).unwrap(), t.model);
    }

    #[test]
    fn assignments_tsv_round_trip() {
        let a = vec![
            WarpAssignment {
                utt_id: "a".into(),
                alpha: 0.86,
                score: -1234.5,
            },
            WarpAssignment {
                utt_id: "b".into(),
                alpha: 1.2,
                score: 10.25,
            },
        ];
        let text = render_assignments(&a);
        assert_eq!(parse_assignments(&text, "mem").unwrap(), a);
        assert!(parse_assignments("a\t0.9\n", "mem").is_err());
        assert!(parse_assignments("a\tx\t1\n", "mem").is_err());
    }

    #[test]
    fn mixture_schedule() {
        assert_eq!(mixture_size(64, 1, 2), 8);
        assert_eq!(mixture_size(64, 2, 2), 64);
        assert_eq!(mixture_size(8, 4, 4), 8);
        assert_eq!(mixture_size(1, 1, 3), 1);
    }
}
