//! Maximum marginal likelihood estimation of (σ_f², ℓ, σ_y²).
//!
//! Ascent runs in log-parameter space. Each step moves along a
//! quasi-Newton (BFGS) preconditioned gradient with a backtracking Armijo
//! line search; the first start is the caller's θ and the remaining starts
//! are log-normal perturbations of it.

use nalgebra::{Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::kernel::KernelSpec;
use super::posterior::{log_marginal_likelihood, NoiseModel, ObservationSet};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerOptions {
    pub restarts: usize,
    pub max_iterations: usize,
    /// Lower bound on the shared noise variance.
    pub noise_floor: f64,
    /// Std-dev of the log-space perturbation applied to restarts after the first.
    pub restart_spread: f64,
    /// Converged when the log-space gradient's largest component falls below this.
    pub gradient_tolerance: f64,
    pub seed: u64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            restarts: 5,
            max_iterations: 200,
            noise_floor: 1e-6,
            restart_spread: 0.5,
            gradient_tolerance: 1e-5,
            seed: 0x5EED,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimized {
    pub spec: KernelSpec,
    pub noise: NoiseModel,
    pub log_likelihood: f64,
    pub initial_log_likelihood: f64,
    /// False when no restart met the convergence test; the best point seen is still returned.
    pub converged: bool,
    /// True when optimisation was skipped because there were fewer than two observations.
    pub skipped: bool,
}

const LOG_SIGNAL_BOUNDS: (f64, f64) = (-30.0, 30.0);
const LOG_LENGTH_BOUNDS: (f64, f64) = (-7.0, 14.0);
const LOG_NOISE_MAX: f64 = 30.0;

struct Objective<'a> {
    obs: &'a ObservationSet,
    noise: &'a NoiseModel,
    base: KernelSpec,
    lower: Vector3<f64>,
    upper: Vector3<f64>,
}

impl Objective<'_> {
    fn unpack(&self, p: &Vector3<f64>) -> (KernelSpec, f64) {
        let spec = KernelSpec {
            family: self.base.family,
            signal_variance: p[0].exp(),
            lengthscale: p[1].exp(),
        };
        (spec, p[2].exp())
    }

    fn clamp(&self, p: Vector3<f64>) -> Vector3<f64> {
        p.zip_zip_map(&self.lower, &self.upper, |v, lo, hi| v.clamp(lo, hi))
    }

    /// Value and log-space gradient, or `None` where the likelihood is not computable.
    fn eval(&self, p: &Vector3<f64>) -> Option<(f64, Vector3<f64>)> {
        let (spec, shared) = self.unpack(p);
        let noise = self.noise.with_shared(shared).ok()?;
        let lml = log_marginal_likelihood(self.obs, &noise, &spec).ok()?;
        let g = Vector3::new(
            lml.gradient[0] * spec.signal_variance,
            lml.gradient[1] * spec.lengthscale,
            lml.gradient[2] * shared,
        );
        (lml.value.is_finite() && g.iter().all(|v| v.is_finite())).then_some((lml.value, g))
    }

    /// Zeroes gradient components that push against an active bound.
    fn project(&self, p: &Vector3<f64>, g: &Vector3<f64>) -> Vector3<f64> {
        Vector3::from_fn(|i, _| {
            let at_lo = p[i] <= self.lower[i] && g[i] < 0.0;
            let at_hi = p[i] >= self.upper[i] && g[i] > 0.0;
            if at_lo || at_hi {
                0.0
            } else {
                g[i]
            }
        })
    }
}

struct Ascent {
    point: Vector3<f64>,
    value: f64,
    converged: bool,
}

fn ascend(obj: &Objective, start: Vector3<f64>, opts: &OptimizerOptions) -> Option<Ascent> {
    let mut p = obj.clamp(start);
    let (mut f, mut g) = obj.eval(&p)?;
    let mut h = Matrix3::<f64>::identity();
    let mut converged = false;

    for _ in 0..opts.max_iterations {
        let pg = obj.project(&p, &g);
        if pg.amax() <= opts.gradient_tolerance * f.abs().max(1.0) {
            converged = true;
            break;
        }
        let mut dir = h * pg;
        if dir.dot(&pg) <= 0.0 {
            h = Matrix3::identity();
            dir = pg;
        }
        // keep a single step within a factor of e^3 per parameter
        let longest = dir.amax();
        if longest > 3.0 {
            dir *= 3.0 / longest;
        }
        let slope = dir.dot(&pg);

        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-10 {
            let q = obj.clamp(p + dir * t);
            if let Some((fq, gq)) = obj.eval(&q) {
                if fq >= f + 1e-4 * t * slope {
                    accepted = Some((q, fq, gq));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((q, fq, gq)) = accepted else {
            // no ascent possible along the preconditioned direction
            if h != Matrix3::identity() {
                h = Matrix3::identity();
                continue;
            }
            converged = pg.amax() <= 1e3 * opts.gradient_tolerance * f.abs().max(1.0);
            break;
        };

        // BFGS update for maximisation: minimise −f, so y = −(gq − g).
        let s = q - p;
        let y = g - gq;
        let sy = s.dot(&y);
        if sy > 1e-12 {
            let rho = 1.0 / sy;
            let i = Matrix3::identity();
            h = (i - s * y.transpose() * rho) * h * (i - y * s.transpose() * rho) + s * s.transpose() * rho;
        }
        let improvement = fq - f;
        p = q;
        f = fq;
        g = gq;
        if improvement.abs() <= 1e-12 * f.abs().max(1.0) && obj.project(&p, &g).amax() <= 1e2 * opts.gradient_tolerance * f.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    Some(Ascent {
        point: p,
        value: f,
        converged,
    })
}

/// Maximises the log marginal likelihood over σ_f², ℓ and the shared noise variance.
///
/// Pinned per-point noise entries stay fixed. With fewer than two
/// observations the problem is unidentifiable and θ0 is returned unchanged.
pub fn optimize_hyperparameters(
    obs: &ObservationSet,
    noise0: &NoiseModel,
    spec0: &KernelSpec,
    opts: &OptimizerOptions,
) -> Result<Optimized> {
    spec0.validate()?;
    if obs.len() < 2 {
        let initial = if obs.is_empty() {
            f64::NAN
        } else {
            log_marginal_likelihood(obs, noise0, spec0)?.value
        };
        return Ok(Optimized {
            spec: *spec0,
            noise: noise0.clone(),
            log_likelihood: initial,
            initial_log_likelihood: initial,
            converged: true,
            skipped: true,
        });
    }
    let initial = log_marginal_likelihood(obs, noise0, spec0)?.value;

    let floor = opts.noise_floor.max(f64::MIN_POSITIVE).ln();
    let obj = Objective {
        obs,
        noise: noise0,
        base: *spec0,
        lower: Vector3::new(LOG_SIGNAL_BOUNDS.0, LOG_LENGTH_BOUNDS.0, floor),
        upper: Vector3::new(LOG_SIGNAL_BOUNDS.1, LOG_LENGTH_BOUNDS.1, LOG_NOISE_MAX),
    };
    let p0 = Vector3::new(
        spec0.signal_variance.ln(),
        spec0.lengthscale.ln(),
        noise0.shared().max(opts.noise_floor).ln(),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let spread = Normal::new(0.0, opts.restart_spread.max(0.0)).expect("finite spread");
    let mut best: Option<Ascent> = None;
    let mut any_converged = false;
    for r in 0..opts.restarts.max(1) {
        let start = if r == 0 {
            p0
        } else {
            p0 + Vector3::from_fn(|_, _| spread.sample(&mut rng))
        };
        if let Some(run) = ascend(&obj, start, opts) {
            any_converged |= run.converged;
            if best.as_ref().is_none_or(|b| run.value > b.value) {
                best = Some(run);
            }
        }
    }

    let (spec, noise, value) = match best {
        Some(b) if b.value >= initial => {
            let (spec, shared) = obj.unpack(&b.point);
            (spec, noise0.with_shared(shared)?, b.value)
        }
        _ => (*spec0, noise0.clone(), initial),
    };
    Ok(Optimized {
        spec,
        noise,
        log_likelihood: value,
        initial_log_likelihood: initial,
        converged: any_converged,
        skipped: false,
    })
}
