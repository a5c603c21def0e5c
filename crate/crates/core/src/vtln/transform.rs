//! Affine feature transforms fitted by ridge-regularized least squares.

use nalgebra::DMatrix;

use crate::{Error, Result};

/// `y = A x + b` with a cached `ln |det A|`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineTransform {
    dim: usize,
    /// Row-major `dim x dim`.
    a: Vec<f64>,
    b: Vec<f64>,
    log_det: f64,
}

impl AffineTransform {
    pub fn identity(dim: usize) -> Self {
        let mut a = vec![0.0; dim * dim];
        (0..dim).for_each(|i| a[i * dim + i] = 1.0);
        Self {
            dim,
            a,
            b: vec![0.0; dim],
            log_det: 0.0,
        }
    }

    /// Builds a transform, checking invertibility and computing the log
    /// determinant.
    pub fn new(dim: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if dim == 0 || a.len() != dim * dim || b.len() != dim {
            return Err(Error::Dimension {
                expected: dim * dim + dim,
                got: a.len() + b.len(),
            });
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite transform entry".into()));
        }
        let det = DMatrix::from_row_slice(dim, dim, &a).lu().determinant();
        if !(det.abs() > 1e-12) {
            return Err(Error::Numeric(format!("transform is not invertible (det = {det:e})")));
        }
        Ok(Self {
            dim,
            a,
            b,
            log_det: det.abs().ln(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &[f64] {
        &self.a
    }

    pub fn offset(&self) -> &[f64] {
        &self.b
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim;
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.a[i * d..(i + 1) * d];
            *o = self.b[i] + row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>();
        }
    }

    /// Transforms every row of a row-major frame buffer.
    pub fn apply_frames(&self, frames: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; frames.len()];
        for (x, y) in frames.chunks_exact(self.dim).zip(out.chunks_exact_mut(self.dim)) {
            self.apply(x, y);
        }
        out
    }

    /// Frobenius distance of `[A | b]` from `[I | 0]`.
    pub fn distance_from_identity(&self) -> f64 {
        let d = self.dim;
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                let target = if i == j { 1.0 } else { 0.0 };
                s += (self.a[i * d + j] - target).powi(2);
            }
            s += self.b[i].powi(2);
        }
        s.sqrt()
    }
}

/// Sufficient statistics for a ridge affine regression from `x` to `y`.
///
/// Accumulating separately and solving once lets many utterances feed one
/// fit without keeping their frames.
#[derive(Debug, Clone)]
pub struct RegressionStats {
    dim: usize,
    frames: usize,
    /// `sum z z^T`, with `z = [x; 1]`, `(dim+1)^2`.
    gram: Vec<f64>,
    /// `sum z y^T`, `(dim+1) x dim`.
    cross: Vec<f64>,
}

impl RegressionStats {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            frames: 0,
            gram: vec![0.0; (dim + 1) * (dim + 1)],
            cross: vec![0.0; (dim + 1) * dim],
        }
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn accumulate(&mut self, base: &[f64], warped: &[f64]) -> Result<()> {
        let d = self.dim;
        if base.len() != warped.len() || base.len() % d != 0 {
            return Err(Error::Dimension {
                expected: base.len(),
                got: warped.len(),
            });
        }
        let e = d + 1;
        let mut z = vec![1.0; e];
        for (x, y) in base.chunks_exact(d).zip(warped.chunks_exact(d)) {
            z[..d].copy_from_slice(x);
            for i in 0..e {
                let zi = z[i];
                for j in i..e {
                    self.gram[i * e + j] += zi * z[j];
                }
                for (j, yj) in y.iter().enumerate() {
                    self.cross[i * d + j] += zi * yj;
                }
            }
            self.frames += 1;
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &RegressionStats) {
        self.frames += other.frames;
        self.gram.iter_mut().zip(&other.gram).for_each(|(a, b)| *a += b);
        self.cross.iter_mut().zip(&other.cross).for_each(|(a, b)| *a += b);
    }

    /// Minimizes `sum ||A x + b - y||^2 + ridge ||A - I||_F^2`; `b` is not
    /// penalized.
    pub fn solve(&self, ridge: f64) -> Result<AffineTransform> {
        let d = self.dim;
        let e = d + 1;
        if self.frames < e {
            return Err(Error::InsufficientData(format!(
                "{} frames for a dim-{d} affine fit; need at least {e}",
                self.frames
            )));
        }
        if !(ridge >= 0.0) {
            return Err(Error::InvalidArgument(format!("ridge {ridge} must be non-negative")));
        }
        let mut g = DMatrix::<f64>::zeros(e, e);
        for i in 0..e {
            for j in i..e {
                g[(i, j)] = self.gram[i * e + j];
                g[(j, i)] = self.gram[i * e + j];
            }
        }
        let mut c = DMatrix::<f64>::from_row_slice(e, d, &self.cross);
        for i in 0..d {
            g[(i, i)] += ridge;
            c[(i, i)] += ridge;
        }
        let w = match g.clone().cholesky() {
            Some(ch) => ch.solve(&c),
            None => g
                .lu()
                .solve(&c)
                .ok_or_else(|| Error::Numeric("rank-deficient regression; increase the ridge".into()))?,
        };
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("rank-deficient regression; increase the ridge".into()));
        }
        // W is (d+1) x d with y^T = z^T W, so A = W[0..d]^T and b = W[d].
        let mut a = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                a[i * d + j] = w[(j, i)];
            }
        }
        let b: Vec<f64> = (0..d).map(|j| w[(d, j)]).collect();
        AffineTransform::new(d, a, b)
    }
}

/// Fits `warped ~ A base + b` over frame-aligned row-major buffers.
pub fn estimate_transform(base: &[f64], warped: &[f64], dim: usize, ridge: f64) -> Result<AffineTransform> {
    let mut stats = RegressionStats::new(dim);
    stats.accumulate(base, warped)?;
    stats.solve(ridge)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_frames(n: usize, dim: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n * dim).map(|_| rng.gen_range(-3.0..3.0)).collect()
    }

    #[test]
    fn identity_fit() {
        let x = random_frames(200, 5, 1);
        let t = estimate_transform(&x, &x, 5, 1e-6).unwrap();
        assert!(t.distance_from_identity() < 1e-6);
        assert!(t.log_det().abs() < 1e-6);
    }

    #[test]
    fn doubling_fit() {
        let x = random_frames(200, 4, 2);
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let t = estimate_transform(&x, &y, 4, 1e-6).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 2.0 } else { 0.0 };
                assert!((t.matrix()[i * 4 + j] - want).abs() < 1e-6);
            }
        }
        assert!((t.log_det() - 4.0 * 2f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn recovers_random_affine() {
        let dim = 6;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // Diagonally dominant, hence well-conditioned.
        let mut a = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                a[i * dim + j] = if i == j { 1.5 } else { rng.gen_range(-0.2..0.2) };
            }
        }
        let b: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let truth = AffineTransform::new(dim, a.clone(), b.clone()).unwrap();
        let x = random_frames(10 * dim * dim, dim, 4);
        let y = truth.apply_frames(&x);
        let fit = estimate_transform(&x, &y, dim, 1e-6).unwrap();
        for (u, v) in fit.matrix().iter().zip(&a) {
            assert!((u - v).abs() < 1e-4);
        }
        for (u, v) in fit.offset().iter().zip(&b) {
            assert!((u - v).abs() < 1e-4);
        }
        let det = DMatrix::from_row_slice(dim, dim, &a).determinant();
        assert!((fit.log_det() - det.abs().ln()).abs() < 1e-8);
    }

    #[test]
    fn constant_input_is_repaired_by_ridge() {
        // Zero-variance inputs leave only the ridge to pin A.
        let x = vec![1.0; 50 * 3];
        let t = estimate_transform(&x, &x, 3, 1.0).unwrap();
        assert!(t.log_det().is_finite());
    }

    #[test]
    fn too_few_frames() {
        let x = random_frames(3, 4, 5);
        assert!(matches!(
            estimate_transform(&x, &x, 4, 1e-6),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn singular_matrix_rejected() {
        assert!(AffineTransform::new(2, vec![1.0, 2.0, 2.0, 4.0], vec![0.0, 0.0]).is_err());
    }
}
