//! Noisy, occluded sinusoidal edge test cases.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::gradient::gradient_magnitude;
use super::grid::{GradientField, Grid};
use crate::error::{Error, Result};

/// Intensity above the edge.
pub const UPPER_INTENSITY: f64 = 0.25;
/// Intensity below the edge.
pub const LOWER_INTENSITY: f64 = 0.75;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SinusoidParams {
    pub height: usize,
    pub width: usize,
    /// Peak deviation from the middle row, pixels.
    pub amplitude: f64,
    /// Number of full periods across the width.
    pub periods: f64,
    /// Standard deviation of additive Gaussian pixel noise.
    pub noise_level: f64,
    /// Inclusive column spans where the gradient is erased.
    pub occlusion_spans: Vec<(usize, usize)>,
    pub seed: u64,
}

impl Default for SinusoidParams {
    /// 500 x 720 image with four periods; the last two are crossed by four
    /// 21-column occlusions.
    fn default() -> Self {
        SinusoidParams {
            height: 500,
            width: 720,
            amplitude: 75.0,
            periods: 4.0,
            noise_level: 0.25,
            occlusion_spans: vec![(420, 440), (490, 510), (560, 580), (640, 660)],
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCase {
    pub image: Grid,
    pub gradient: GradientField,
    /// Ground-truth edge row for every column.
    pub truth: Vec<f64>,
    /// Per column, whether its gradient was erased.
    pub occlusion_mask: Vec<bool>,
}

impl SinusoidParams {
    pub fn truth_at(&self, x: f64) -> f64 {
        self.height as f64 / 2.0
            + self.amplitude * (std::f64::consts::TAU * self.periods * x / self.width as f64).sin()
    }

    pub fn validate(&self) -> Result<()> {
        if self.height < 3 || self.width < 3 {
            return Err(Error::config("synthetic image must be at least 3x3"));
        }
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0)
            || self.height as f64 / 2.0 + self.amplitude > (self.height - 1) as f64
        {
            return Err(Error::config(format!(
                "amplitude {} does not fit inside an image of height {}",
                self.amplitude, self.height
            )));
        }
        if !(self.noise_level.is_finite() && self.noise_level >= 0.0) || !self.periods.is_finite() {
            return Err(Error::config("noise level and periods must be finite, noise non-negative"));
        }
        for &(a, b) in &self.occlusion_spans {
            if a > b || b >= self.width {
                return Err(Error::config(format!(
                    "occlusion span {a}:{b} is not inside [0, {}]",
                    self.width - 1
                )));
            }
        }
        Ok(())
    }
}

/// Draws the edge as an anti-aliased intensity step, adds pixel noise and
/// erases the gradient on the occluded spans.
pub fn make_sinusoid_case(params: &SinusoidParams) -> Result<SyntheticCase> {
    params.validate()?;
    let (h, w) = (params.height, params.width);
    let truth: Vec<f64> = (0..w).map(|c| params.truth_at(c as f64)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let noise = Normal::new(0.0, params.noise_level).expect("validated noise level");
    let mut image = Grid::from_fn(h, w, |r, c| {
        // fraction of pixel [r - ½, r + ½] lying below the edge
        let below = (r as f64 + 0.5 - truth[c]).clamp(0.0, 1.0);
        UPPER_INTENSITY + (LOWER_INTENSITY - UPPER_INTENSITY) * below
    });
    if params.noise_level > 0.0 {
        image.data_mut().iter_mut().for_each(|v| *v += noise.sample(&mut rng));
    }

    let gradient = gradient_magnitude(&image).occlude_columns(&params.occlusion_spans);
    let mut occlusion_mask = vec![false; w];
    for &(a, b) in &params.occlusion_spans {
        occlusion_mask[a..=b].iter_mut().for_each(|m| *m = true);
    }
    Ok(SyntheticCase {
        image,
        gradient,
        truth,
        occlusion_mask,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_along_truth(case: &SyntheticCase, cols: impl Iterator<Item = usize>) -> f64 {
        let v: Vec<f64> = cols.map(|c| case.gradient.bilinear(c as f64, case.truth[c])).collect();
        v.iter().sum::<f64>() / v.len() as f64
    }

    #[test]
    fn clean_edge_carries_near_maximal_response() {
        let p = SinusoidParams {
            noise_level: 0.0,
            occlusion_spans: vec![],
            ..Default::default()
        };
        let case = make_sinusoid_case(&p).unwrap();
        let m = mean_along_truth(&case, 0..p.width);
        assert!(m > 0.85, "mean response along truth {m}");
    }

    #[test]
    fn default_case_has_a_ridge_along_truth() {
        let case = make_sinusoid_case(&SinusoidParams::default()).unwrap();
        let visible = (0..720).filter(|&c| !case.occlusion_mask[c]);
        assert!(mean_along_truth(&case, visible) > 0.5);
        // clean first half, degraded second half
        assert!(case.occlusion_mask[..360].iter().all(|m| !m));
        assert!(case.occlusion_mask[360..].iter().any(|&m| m));
    }

    #[test]
    fn occluded_columns_are_zero() {
        let p = SinusoidParams {
            occlusion_spans: vec![(100, 150)],
            ..Default::default()
        };
        let case = make_sinusoid_case(&p).unwrap();
        for c in 100..=150 {
            assert!((0..p.height).all(|r| case.gradient.get(r, c) == 0.0));
        }
        assert!(case.gradient.grid().max() == 1.0);
    }

    #[test]
    fn truth_is_in_bounds_and_deterministic() {
        let p = SinusoidParams::default();
        let a = make_sinusoid_case(&p).unwrap();
        let b = make_sinusoid_case(&p).unwrap();
        assert_eq!(a.image, b.image);
        assert!(a.truth.iter().all(|&t| t >= 0.0 && t <= (p.height - 1) as f64));
        let range = a.truth.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - a.truth.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((range - 150.0).abs() <= 1.0);
    }

    #[test]
    fn rejects_oversized_amplitude_and_bad_spans() {
        let p = SinusoidParams {
            amplitude: 260.0,
            ..Default::default()
        };
        assert!(make_sinusoid_case(&p).is_err());
        let p = SinusoidParams {
            occlusion_spans: vec![(700, 800)],
            ..Default::default()
        };
        assert!(make_sinusoid_case(&p).is_err());
    }
}
