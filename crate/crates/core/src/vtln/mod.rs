//! Vocal tract length normalization: a diagonal GMM scores MFCC frames
//! mapped through one affine transform per candidate warp factor, and the
//! best-scoring factor is chosen per utterance.

mod gmm;
mod model;
mod stats;
mod transform;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use gmm::{refine_gmm, train_gmm, DiagGmm, GmmFit, GmmTrainConfig};
pub use model::{
    apply_warp, estimate_warp, parse_assignments, read_model, render_assignments, train_vtln, warp_scores,
    write_model, FeatureSpec, Frontend, NamedWave, VtlnConfig, VtlnModel, VtlnTraining, WarpAssignment,
    MODEL_MAGIC,
};
pub use stats::{five_number, warp_statistics, FiveNumber};
pub use transform::{estimate_transform, AffineTransform, RegressionStats};

/// Candidate warp factors `alpha_min, alpha_min + step, ..., alpha_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WarpGrid {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub step: f64,
}

impl Default for WarpGrid {
    fn default() -> Self {
        Self {
            alpha_min: 0.80,
            alpha_max: 1.20,
            step: 0.02,
        }
    }
}

/// Grid values are rounded to this many decimals so that 1.0 is hit exactly.
const GRID_DECIMALS: f64 = 1e6;

impl WarpGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        let (lo, hi, step) = (self.alpha_min, self.alpha_max, self.step);
        if !(step > 0.0 && lo > 0.0 && lo <= 1.0 && hi >= 1.0) {
            return Err(Error::Config(format!(
                "warp grid [{lo}, {hi}] step {step} must be positive and bracket 1.0"
            )));
        }
        let span = (hi - lo) / step;
        let n = span.round();
        if (span - n).abs() > 1e-6 {
            return Err(Error::Config(format!("grid step {step} does not divide [{lo}, {hi}]")));
        }
        let values: Vec<f64> = (0..=n as usize)
            .map(|i| ((lo + i as f64 * step) * GRID_DECIMALS).round() / GRID_DECIMALS)
            .collect();
        if !values.contains(&1.0) {
            return Err(Error::Config(format!("warp grid [{lo}, {hi}] step {step} misses 1.0")));
        }
        Ok(values)
    }

    /// Position of `alpha` in the grid, if it is a member.
    pub fn index_of(&self, alpha: f64) -> Option<usize> {
        self.values()
            .ok()?
            .iter()
            .position(|v| (v - alpha).abs() < 0.5 / GRID_DECIMALS)
    }
}
