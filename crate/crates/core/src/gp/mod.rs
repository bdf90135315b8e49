//! Gaussian process regression over a one-dimensional input domain.

mod kernel;
mod optimize;
mod posterior;

pub use kernel::{gram, kernel_eval, KernelFamily, KernelSpec};
pub use optimize::{optimize_hyperparameters, Optimized, OptimizerOptions};
pub use posterior::{
    log_marginal_likelihood, posterior, sample_posterior, MarginalLikelihood, NoiseModel, ObservationSet,
    PosteriorBatch, PosteriorPredictive, BASE_JITTER, MAX_JITTER,
};
