//! Recursive edge tracing.
//!
//! Each iteration samples `L` curves from the current posterior, keeps the
//! `⌊εL⌋` with the highest gradient score, deposits a score-weighted density
//! of where they pass, scores pixels as `(φG + φ + G)/3`, and rebuilds the
//! observation set with one pixel per column sub-interval. When an iteration
//! cannot grow the set, the threshold is relaxed and the pixel selection is
//! repeated. Once every sub-interval holds a pixel the hyperparameters are
//! fitted by maximum marginal likelihood and the optimised posterior mean is
//! returned with a pointwise 95% band.

mod accept;
mod config;
mod density;
mod scoring;
mod sequence;

use serde::{Deserialize, Serialize};

pub use accept::{accept_discard, bin_of, EdgePoint};
pub use config::TraceConfig;
pub use density::{build_density, deposit, FrequencyDensity, WeightedPoint, SUPPORT_RADIUS};
pub use scoring::{score_batch, score_curve, score_pixels, select_optimal, OptimalCurves};
pub use sequence::{trace_sequence, Propagation};

use crate::error::{Error, Result};
use crate::gp::{
    optimize_hyperparameters, posterior, sample_posterior, KernelSpec, NoiseModel, ObservationSet, OptimizerOptions,
    PosteriorPredictive,
};
use crate::image::GradientField;

/// z-value of the pointwise 95% band.
pub const BAND_Z: f64 = 1.96;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// |D^(n)| after accept-discard.
    pub observations: usize,
    /// Threshold that produced this observation set.
    pub threshold: f64,
    /// Highest curve score in the iteration.
    pub best_score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Every sub-interval holds an observation.
    Complete,
    MaxIterations,
    /// The threshold reached its floor without the observation set growing.
    ThresholdExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedHyperparameters {
    pub kernel: KernelSpec,
    pub noise_variance: f64,
    pub log_likelihood: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceResult {
    /// Optimised posterior mean row per column.
    pub mean: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub observations: Vec<EdgePoint>,
    pub theta_hat: FittedHyperparameters,
    pub iterations: usize,
    pub diagnostics: Vec<IterationRecord>,
    pub stop_reason: StopReason,
    pub final_threshold: f64,
}

impl TraceResult {
    pub fn converged(&self) -> bool {
        self.stop_reason == StopReason::Complete
    }
}

fn iteration_seed(seed: u64, iteration: usize) -> u64 {
    seed ^ (iteration as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Rows are modelled relative to `offset` (a constant mean function).
pub(crate) fn to_gp_inputs(points: &[EdgePoint], shared_noise: f64, offset: f64) -> Result<(ObservationSet, NoiseModel)> {
    let obs = ObservationSet::new(
        points.iter().map(|p| p.col as f64).collect(),
        points.iter().map(|p| p.row - offset).collect(),
    )?;
    let noise = NoiseModel::new(shared_noise, points.iter().map(|p| p.noise).collect())?;
    Ok((obs, noise))
}

fn fit(points: &[EdgePoint], config: &TraceConfig, xstar: &[f64], offset: f64) -> Result<PosteriorPredictive> {
    let (obs, noise) = to_gp_inputs(points, config.noise_variance, offset)?;
    let mut ppd = posterior(&obs, &noise, &config.kernel, xstar)?;
    ppd.mean.add_scalar_mut(offset);
    Ok(ppd)
}

/// True when there are exactly ⌈N/Δx⌉ observations, one per sub-interval.
fn is_complete(points: &[EdgePoint], bin_width: usize, bins: usize) -> bool {
    if points.len() != bins {
        return false;
    }
    let mut seen = vec![false; bins];
    for p in points {
        let b = bin_of(p.col, bin_width, bins);
        if seen[b] {
            return false;
        }
        seen[b] = true;
    }
    true
}

fn validate_init(init: &[EdgePoint], gradient: &GradientField) -> Result<Vec<EdgePoint>> {
    let (h, w) = (gradient.height(), gradient.width());
    if w < 3 || h < 1 {
        return Err(Error::config("gradient field must be at least 3 columns wide"));
    }
    if init.is_empty() {
        return Err(Error::config("at least one initial edge pixel is required"));
    }
    let mut pts = init.to_vec();
    pts.sort_by_key(|p| p.col);
    if pts.windows(2).any(|p| p[0].col == p[1].col) {
        return Err(Error::config("initial edge pixels must have distinct columns"));
    }
    ObservationSet::new(pts.iter().map(|p| p.col as f64).collect(), pts.iter().map(|p| p.row).collect())?
        .check_bounds(w, h)?;
    Ok(pts)
}

/// The tracing loop as an explicit state machine, for callers that want to
/// inspect or intervene between iterations. [`trace`] drives it to the end.
pub struct Tracer<'a> {
    config: &'a TraceConfig,
    gradient: &'a GradientField,
    xstar: Vec<f64>,
    bins: usize,
    offset: f64,
    points: Vec<EdgePoint>,
    ppd: PosteriorPredictive,
    threshold: f64,
    iterations: usize,
    diagnostics: Vec<IterationRecord>,
    stopped: Option<StopReason>,
}

impl<'a> Tracer<'a> {
    pub fn new(config: &'a TraceConfig, gradient: &'a GradientField, init: &[EdgePoint]) -> Result<Self> {
        config.validate()?;
        let points = validate_init(init, gradient)?;
        let xstar: Vec<f64> = (0..gradient.width()).map(|c| c as f64).collect();
        // constant prior mean at the average initial row
        let offset = points.iter().map(|p| p.row).sum::<f64>() / points.len() as f64;
        let ppd = fit(&points, config, &xstar, offset)?;
        Ok(Tracer {
            config,
            gradient,
            bins: config.bin_count(gradient.width()),
            xstar,
            offset,
            points,
            ppd,
            threshold: config.threshold,
            iterations: 0,
            diagnostics: Vec::new(),
            stopped: None,
        })
    }

    pub fn observations(&self) -> &[EdgePoint] {
        &self.points
    }

    /// Current posterior predictive over every column.
    pub fn posterior(&self) -> &PosteriorPredictive {
        &self.ppd
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn diagnostics(&self) -> &[IterationRecord] {
        &self.diagnostics
    }

    /// Replaces the observation set and refits the posterior.
    pub fn set_observations(&mut self, points: &[EdgePoint]) -> Result<()> {
        let points = validate_init(points, self.gradient)?;
        self.ppd = fit(&points, self.config, &self.xstar, self.offset)?;
        self.points = points;
        self.stopped = None;
        Ok(())
    }

    /// Runs one iteration. Returns the stop reason once the loop is over.
    pub fn step(&mut self) -> Result<Option<StopReason>> {
        if let Some(r) = self.stopped {
            return Ok(Some(r));
        }
        let config = self.config;
        let (h, w) = (self.gradient.height(), self.gradient.width());
        if is_complete(&self.points, config.bin_width, self.bins) {
            return Ok(self.stop(StopReason::Complete));
        }
        if self.iterations >= config.max_iterations {
            return Ok(self.stop(StopReason::MaxIterations));
        }
        self.iterations += 1;

        let mut batch = sample_posterior(&self.ppd, config.curves, iteration_seed(config.seed, self.iterations))?;
        score_batch(&mut batch, self.gradient);
        let optimal = select_optimal(&batch, config.keep_ratio, self.iterations)?;
        let curves: Vec<&[f64]> = optimal.indices.iter().map(|&l| batch.curve(l)).collect();
        let density = build_density(&curves, &optimal.scores, h, w, config.density_lengthscale);
        let scores = score_pixels(&density.grid, self.gradient)?;

        let next = loop {
            let candidate = accept_discard(&scores, self.threshold, config.bin_width, &self.points, self.gradient);
            if candidate.len() > self.points.len() || is_complete(&candidate, config.bin_width, self.bins) {
                break candidate;
            }
            if self.threshold <= config.threshold_floor {
                return Ok(self.stop(StopReason::ThresholdExhausted));
            }
            self.threshold = (self.threshold * config.threshold_decay).max(config.threshold_floor);
        };
        self.points = next;
        self.diagnostics.push(IterationRecord {
            iteration: self.iterations,
            observations: self.points.len(),
            threshold: self.threshold,
            best_score: optimal.scores[0],
        });
        self.ppd = fit(&self.points, config, &self.xstar, self.offset)?;
        Ok(None)
    }

    fn stop(&mut self, reason: StopReason) -> Option<StopReason> {
        self.stopped = Some(reason);
        self.stopped
    }

    /// Optimises the hyperparameters on the current observations and returns
    /// the final mean and band.
    pub fn finish(self) -> Result<TraceResult> {
        let config = self.config;
        let stop_reason = self.stopped.unwrap_or(StopReason::MaxIterations);
        let (obs, noise) = to_gp_inputs(&self.points, config.noise_variance, self.offset)?;
        let opts = OptimizerOptions {
            restarts: config.optimizer_restarts.max(1),
            seed: config.seed,
            ..OptimizerOptions::default()
        };
        let fitted = optimize_hyperparameters(&obs, &noise, &config.kernel, &opts)?;
        let mut ppd = posterior(&obs, &fitted.noise, &fitted.spec, &self.xstar)?;
        ppd.mean.add_scalar_mut(self.offset);
        let (lower, upper) = ppd.band(BAND_Z);
        Ok(TraceResult {
            mean: ppd.mean.iter().copied().collect(),
            lower,
            upper,
            observations: self.points,
            theta_hat: FittedHyperparameters {
                kernel: fitted.spec,
                noise_variance: fitted.noise.shared(),
                log_likelihood: fitted.log_likelihood,
                converged: fitted.converged,
            },
            iterations: self.iterations,
            diagnostics: self.diagnostics,
            stop_reason,
            final_threshold: self.threshold,
        })
    }
}

/// Traces the edge through `gradient` starting from `init` (typically the two
/// endpoint estimates, possibly with pinned noise, or a propagated pixel set).
pub fn trace(config: &TraceConfig, gradient: &GradientField, init: &[EdgePoint]) -> Result<TraceResult> {
    let mut tracer = Tracer::new(config, gradient, init)?;
    while tracer.step()?.is_none() {}
    tracer.finish()
}
