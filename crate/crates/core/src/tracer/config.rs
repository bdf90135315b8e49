use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::{KernelFamily, KernelSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceConfig {
    pub kernel: KernelSpec,
    /// σ_y², squared pixels.
    pub noise_variance: f64,
    /// Posterior curves drawn per iteration (L).
    pub curves: usize,
    /// Proportion ε of curves kept as optimal.
    pub keep_ratio: f64,
    /// Initial pixel score threshold T.
    pub threshold: f64,
    /// Factor applied to T whenever an iteration fails to grow the observation set.
    pub threshold_decay: f64,
    /// T is never reduced below this.
    pub threshold_floor: f64,
    /// Sub-interval length Δx, pixels.
    pub bin_width: usize,
    /// Lengthscale ℓ_φ of the density kernel, pixels.
    pub density_lengthscale: f64,
    pub max_iterations: usize,
    /// Restarts for the final hyperparameter optimisation.
    pub optimizer_restarts: usize,
    pub seed: u64,
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig {
            kernel: KernelSpec {
                family: KernelFamily::Matern52,
                signal_variance: 75.0 * 75.0,
                lengthscale: 20.0,
            },
            noise_variance: 1.0,
            curves: 500,
            keep_ratio: 0.1,
            threshold: 0.6,
            threshold_decay: 0.9,
            threshold_floor: 0.01,
            bin_width: 5,
            density_lengthscale: 1.0,
            max_iterations: 50,
            optimizer_restarts: 5,
            seed: 0,
        }
    }
}

impl TraceConfig {
    /// Number of curves kept per iteration, ⌊εL⌋.
    pub fn kept_curves(&self) -> usize {
        (self.keep_ratio * self.curves as f64 + 1e-9).floor() as usize
    }

    /// ⌈N/Δx⌉ sub-intervals across an image of the given width.
    pub fn bin_count(&self, width: usize) -> usize {
        width.div_ceil(self.bin_width)
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        let fail = |m: String| Err(Error::Config(m));
        if !(self.noise_variance.is_finite() && self.noise_variance >= 0.0) {
            return fail(format!("noise variance must be non-negative, got {}", self.noise_variance));
        }
        if self.curves == 0 {
            return fail("curve count must be at least 1".into());
        }
        if !(self.keep_ratio > 0.0 && self.keep_ratio <= 1.0) {
            return fail(format!("keep ratio must lie in (0, 1], got {}", self.keep_ratio));
        }
        if self.kept_curves() < 1 {
            return fail(format!(
                "keep ratio {} keeps no curves out of {}",
                self.keep_ratio, self.curves
            ));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return fail(format!("threshold must lie in [0, 1], got {}", self.threshold));
        }
        if !(self.threshold_decay > 0.0 && self.threshold_decay < 1.0) {
            return fail(format!("threshold decay must lie in (0, 1), got {}", self.threshold_decay));
        }
        if !(0.0..=1.0).contains(&self.threshold_floor) {
            return fail(format!("threshold floor must lie in [0, 1], got {}", self.threshold_floor));
        }
        if self.bin_width < 1 {
            return fail("sub-interval length must be at least 1 pixel".into());
        }
        if !(self.density_lengthscale.is_finite() && self.density_lengthscale > 0.0) {
            return fail(format!(
                "density lengthscale must be positive, got {}",
                self.density_lengthscale
            ));
        }
        Ok(())
    }
}
