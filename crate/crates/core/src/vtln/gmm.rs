//! Diagonal-covariance Gaussian mixture trained by EM.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::{Error, Result};

/// Frames per EM accumulation chunk. Chunks are reduced in order, so
/// results do not depend on the thread count.
const CHUNK: usize = 2048;
/// EM passes after each mixture split.
const MIXUP_ITERS: usize = 3;
/// Components whose soft count falls below this are re-split.
const MIN_OCCUPANCY: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct DiagGmm {
    dim: usize,
    weights: Vec<f64>,
    means: Vec<f64>,
    vars: Vec<f64>,
    /// `ln w_k - 0.5 * sum_d ln(2 pi var_kd)`.
    log_consts: Vec<f64>,
    inv_vars: Vec<f64>,
}

impl DiagGmm {
    pub fn new(dim: usize, weights: Vec<f64>, means: Vec<f64>, vars: Vec<f64>) -> Result<Self> {
        let k = weights.len();
        if dim == 0 || k == 0 || means.len() != k * dim || vars.len() != k * dim {
            return Err(Error::ModelFormat(format!(
                "inconsistent GMM shapes: K={k} dim={dim} means={} vars={}",
                means.len(),
                vars.len()
            )));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-8 {
            return Err(Error::ModelFormat("GMM weights must lie on the simplex".into()));
        }
        if vars.iter().any(|v| !(*v > 0.0)) || means.iter().any(|m| !m.is_finite()) {
            return Err(Error::ModelFormat("GMM variances must be positive".into()));
        }
        let mut g = Self {
            dim,
            weights,
            means,
            vars,
            log_consts: Vec::new(),
            inv_vars: Vec::new(),
        };
        g.refresh();
        Ok(g)
    }

    fn refresh(&mut self) {
        self.inv_vars = self.vars.iter().map(|v| 1.0 / v).collect();
        self.log_consts = (0..self.weights.len())
            .map(|k| {
                let logdet: f64 = self.vars[k * self.dim..(k + 1) * self.dim]
                    .iter()
                    .map(|v| (2.0 * PI * v).ln())
                    .sum();
                self.weights[k].ln() - 0.5 * logdet
            })
            .collect();
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_components(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn vars(&self) -> &[f64] {
        &self.vars
    }

    pub fn mean(&self, k: usize) -> &[f64] {
        &self.means[k * self.dim..(k + 1) * self.dim]
    }

    pub fn var(&self, k: usize) -> &[f64] {
        &self.vars[k * self.dim..(k + 1) * self.dim]
    }

    /// Per-component joint log densities `ln w_k + ln N(x; mu_k, var_k)`.
    fn component_logs(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim;
        for (k, o) in out.iter_mut().enumerate() {
            let mu = &self.means[k * d..(k + 1) * d];
            let iv = &self.inv_vars[k * d..(k + 1) * d];
            let mut q = 0.0;
            for i in 0..d {
                let diff = x[i] - mu[i];
                q += diff * diff * iv[i];
            }
            *o = self.log_consts[k] - 0.5 * q;
        }
    }

    /// Log density of one frame.
    pub fn log_likelihood(&self, x: &[f64]) -> f64 {
        let mut buf = vec![0.0; self.weights.len()];
        self.component_logs(x, &mut buf);
        log_sum_exp(&buf)
    }

    /// Summed log density of row-major frames.
    pub fn total_log_likelihood(&self, frames: &[f64]) -> f64 {
        let mut buf = vec![0.0; self.weights.len()];
        frames
            .chunks_exact(self.dim)
            .map(|x| {
                self.component_logs(x, &mut buf);
                log_sum_exp(&buf)
            })
            .sum()
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// EM training options.
#[derive(Debug, Clone, PartialEq)]
pub struct GmmTrainConfig {
    pub components: usize,
    pub iterations: usize,
    pub seed: u64,
    /// Variance floor as a fraction of the global per-dimension variance.
    pub var_floor_frac: f64,
}

impl Default for GmmTrainConfig {
    fn default() -> Self {
        Self {
            components: 64,
            iterations: 10,
            seed: 0,
            var_floor_frac: 0.01,
        }
    }
}

/// A trained mixture with the data log-likelihood before the first and
/// after every EM iteration.
#[derive(Debug, Clone)]
pub struct GmmFit {
    pub gmm: DiagGmm,
    pub log_likelihoods: Vec<f64>,
}

struct Accum {
    occ: Vec<f64>,
    s1: Vec<f64>,
    s2: Vec<f64>,
    ll: f64,
}

impl Accum {
    fn zeros(k: usize, d: usize) -> Self {
        Self {
            occ: vec![0.0; k],
            s1: vec![0.0; k * d],
            s2: vec![0.0; k * d],
            ll: 0.0,
        }
    }

    fn add(&mut self, o: &Accum) {
        self.ll += o.ll;
        self.occ.iter_mut().zip(&o.occ).for_each(|(a, b)| *a += b);
        self.s1.iter_mut().zip(&o.s1).for_each(|(a, b)| *a += b);
        self.s2.iter_mut().zip(&o.s2).for_each(|(a, b)| *a += b);
    }
}

/// E-step statistics centred on the current means, which keeps the variance
/// update free of cancellation.
fn accumulate(gmm: &DiagGmm, frames: &[f64]) -> Accum {
    let (k, d) = (gmm.n_components(), gmm.dim);
    let parts: Vec<Accum> = frames
        .par_chunks(CHUNK * d)
        .map(|chunk| {
            let mut acc = Accum::zeros(k, d);
            let mut post = vec![0.0; k];
            for x in chunk.chunks_exact(d) {
                gmm.component_logs(x, &mut post);
                let lse = log_sum_exp(&post);
                acc.ll += lse;
                for (c, p) in post.iter_mut().enumerate() {
                    let g = (*p - lse).exp();
                    if g == 0.0 {
                        continue;
                    }
                    acc.occ[c] += g;
                    let mu = &gmm.means[c * d..(c + 1) * d];
                    for i in 0..d {
                        let diff = x[i] - mu[i];
                        acc.s1[c * d + i] += g * diff;
                        acc.s2[c * d + i] += g * diff * diff;
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = Accum::zeros(k, d);
    for p in &parts {
        total.add(p);
    }
    total
}

/// M-step. Components with zero occupancy keep their parameters at zero
/// weight.
fn maximize(gmm: &DiagGmm, acc: &Accum, floor: &[f64]) -> DiagGmm {
    let (k, d) = (gmm.n_components(), gmm.dim);
    let n: f64 = acc.occ.iter().sum();
    let mut weights = vec![0.0; k];
    let mut means = gmm.means.clone();
    let mut vars = gmm.vars.clone();
    for c in 0..k {
        let occ = acc.occ[c];
        weights[c] = occ / n;
        if occ <= 0.0 {
            continue;
        }
        for i in 0..d {
            let shift = acc.s1[c * d + i] / occ;
            means[c * d + i] = gmm.means[c * d + i] + shift;
            let v = acc.s2[c * d + i] / occ - shift * shift;
            vars[c * d + i] = v.max(floor[i]);
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let mut out = DiagGmm {
        dim: d,
        weights,
        means,
        vars,
        log_consts: Vec::new(),
        inv_vars: Vec::new(),
    };
    out.refresh();
    out
}

fn global_stats(frames: &[f64], d: usize) -> (Vec<f64>, Vec<f64>) {
    let n = (frames.len() / d) as f64;
    let mut mean = vec![0.0; d];
    for x in frames.chunks_exact(d) {
        mean.iter_mut().zip(x).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; d];
    for x in frames.chunks_exact(d) {
        for i in 0..d {
            let diff = x[i] - mean[i];
            var[i] += diff * diff;
        }
    }
    var.iter_mut().for_each(|v| *v /= n);
    (mean, var)
}

/// Splits component `c` into two along a random direction scaled by its
/// standard deviations.
fn split(gmm: &mut DiagGmm, c: usize, rng: &mut ChaCha8Rng) {
    let d = gmm.dim;
    let w = gmm.weights[c] / 2.0;
    gmm.weights[c] = w;
    gmm.weights.push(w);
    let mut plus = Vec::with_capacity(d);
    for i in 0..d {
        let dir: f64 = rng.gen_range(-1.0..1.0);
        let delta = 0.2 * dir * gmm.vars[c * d + i].sqrt();
        plus.push(gmm.means[c * d + i] + delta);
        gmm.means[c * d + i] -= delta;
    }
    gmm.means.extend(plus);
    let var = gmm.vars[c * d..(c + 1) * d].to_vec();
    gmm.vars.extend(var);
}

fn validate_frames(frames: &[f64], dim: usize) -> Result<usize> {
    if dim == 0 || frames.len() % dim != 0 {
        return Err(Error::Dimension {
            expected: dim,
            got: frames.len(),
        });
    }
    if frames.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite feature value".into()));
    }
    Ok(frames.len() / dim)
}

/// Trains a `components`-way diagonal GMM on row-major `frames`.
///
/// Initialization grows the mixture from the global Gaussian by binary
/// splitting of the heaviest components; `iterations` EM passes follow.
pub fn train_gmm(frames: &[f64], dim: usize, cfg: &GmmTrainConfig) -> Result<GmmFit> {
    let n = validate_frames(frames, dim)?;
    let k = cfg.components;
    if k == 0 {
        return Err(Error::Config("GMM needs at least one component".into()));
    }
    if n < 10 * k * dim {
        return Err(Error::InsufficientData(format!(
            "{n} frames for a {k}-component GMM of dim {dim}; need at least {}",
            10 * k * dim
        )));
    }
    let (mean, var) = global_stats(frames, dim);
    let floor: Vec<f64> = var.iter().map(|v| (v * cfg.var_floor_frac).max(1e-10)).collect();
    let var: Vec<f64> = var.iter().zip(&floor).map(|(v, f)| v.max(*f)).collect();
    let mut gmm = DiagGmm::new(dim, vec![1.0], mean, var)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    while gmm.n_components() < k {
        let mut order: Vec<usize> = (0..gmm.n_components()).collect();
        order.sort_by(|&a, &b| gmm.weights[b].total_cmp(&gmm.weights[a]).then(a.cmp(&b)));
        let n_split = (k - gmm.n_components()).min(order.len());
        for &c in &order[..n_split] {
            split(&mut gmm, c, &mut rng);
        }
        gmm.refresh();
        for _ in 0..MIXUP_ITERS {
            let acc = accumulate(&gmm, frames);
            gmm = maximize(&gmm, &acc, &floor);
        }
        resplit_degenerate(&mut gmm, frames, &floor, &mut rng);
    }

    let mut history = Vec::with_capacity(cfg.iterations + 1);
    for _ in 0..cfg.iterations {
        let acc = accumulate(&gmm, frames);
        history.push(acc.ll);
        gmm = maximize(&gmm, &acc, &floor);
    }
    history.push(gmm.total_log_likelihood(frames));
    Ok(GmmFit {
        gmm,
        log_likelihoods: history,
    })
}

/// Continues EM from an existing mixture on new data.
pub fn refine_gmm(gmm: &DiagGmm, frames: &[f64], iterations: usize, var_floor_frac: f64) -> Result<GmmFit> {
    let dim = gmm.dim;
    validate_frames(frames, dim)?;
    let (_, var) = global_stats(frames, dim);
    let floor: Vec<f64> = var.iter().map(|v| (v * var_floor_frac).max(1e-10)).collect();
    let mut gmm = gmm.clone();
    let mut history = Vec::with_capacity(iterations + 1);
    for _ in 0..iterations {
        let acc = accumulate(&gmm, frames);
        history.push(acc.ll);
        gmm = maximize(&gmm, &acc, &floor);
    }
    history.push(gmm.total_log_likelihood(frames));
    Ok(GmmFit {
        gmm,
        log_likelihoods: history,
    })
}

fn resplit_degenerate(gmm: &mut DiagGmm, frames: &[f64], floor: &[f64], rng: &mut ChaCha8Rng) {
    let n = (frames.len() / gmm.dim) as f64;
    for _ in 0..gmm.n_components() {
        let Some(dead) = (0..gmm.n_components()).find(|&c| gmm.weights[c] * n < MIN_OCCUPANCY) else {
            return;
        };
        let heaviest = (0..gmm.n_components())
            .max_by(|&a, &b| gmm.weights[a].total_cmp(&gmm.weights[b]))
            .unwrap();
        log::info!("GMM component {dead} is degenerate; re-splitting component {heaviest}");
        remove_component(gmm, dead);
        let heaviest = if heaviest > dead { heaviest - 1 } else { heaviest };
        split(gmm, heaviest, rng);
        gmm.refresh();
        let acc = accumulate(gmm, frames);
        *gmm = maximize(gmm, &acc, floor);
    }
}

fn remove_component(gmm: &mut DiagGmm, c: usize) {
    let d = gmm.dim;
    gmm.weights.remove(c);
    gmm.means.drain(c * d..(c + 1) * d);
    gmm.vars.drain(c * d..(c + 1) * d);
    let total: f64 = gmm.weights.iter().sum();
    gmm.weights.iter_mut().for_each(|w| *w /= total);
}
