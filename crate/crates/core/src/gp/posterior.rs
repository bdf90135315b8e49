use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::kernel::KernelSpec;
use crate::error::{Error, Result};

/// Initial diagonal jitter, relative to the scale of the matrix being factorised.
pub const BASE_JITTER: f64 = 1e-8;
/// Largest relative jitter tried before giving up.
pub const MAX_JITTER: f64 = 1e-2;

/// Fitted pixels `{X, y}`: column inputs and row targets.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ObservationSet {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl ObservationSet {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::config(format!(
                "observation inputs and targets differ in length ({} vs {})",
                x.len(),
                y.len()
            )));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::config("observations must be finite"));
        }
        if x.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("observation inputs must be strictly increasing"));
        }
        Ok(ObservationSet { x, y })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Checks every point lies in `[0, width-1] x [0, height-1]`.
    pub fn check_bounds(&self, width: usize, height: usize) -> Result<()> {
        let (w, h) = ((width as f64) - 1.0, (height as f64) - 1.0);
        for (&x, &y) in self.x.iter().zip(&self.y) {
            if !(0.0..=w).contains(&x) || !(0.0..=h).contains(&y) {
                return Err(Error::config(format!(
                    "observation ({x}, {y}) outside image bounds {width}x{height}"
                )));
            }
        }
        Ok(())
    }
}

/// Per-observation noise variances.
///
/// Entries are either tied to a single shared variance σ_y² (the one the
/// hyperparameter optimiser adjusts) or pinned to a fixed value.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    shared: f64,
    pinned: Vec<Option<f64>>,
}

impl NoiseModel {
    pub fn uniform(variance: f64, len: usize) -> Result<Self> {
        Self::new(variance, vec![None; len])
    }

    pub fn new(shared: f64, pinned: Vec<Option<f64>>) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(shared) || pinned.iter().flatten().any(|&v| !ok(v)) {
            return Err(Error::config("noise variances must be finite and non-negative"));
        }
        Ok(NoiseModel { shared, pinned })
    }

    pub fn shared(&self) -> f64 {
        self.shared
    }

    pub fn len(&self) -> usize {
        self.pinned.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pinned.is_empty()
    }

    pub fn is_pinned(&self, i: usize) -> bool {
        self.pinned[i].is_some()
    }

    pub fn pinned(&self) -> &[Option<f64>] {
        &self.pinned
    }

    pub fn variance(&self, i: usize) -> f64 {
        self.pinned[i].unwrap_or(self.shared)
    }

    pub fn variances(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.variance(i)).collect()
    }

    /// Same pinning with a new shared variance.
    pub fn with_shared(&self, shared: f64) -> Result<Self> {
        Self::new(shared, self.pinned.clone())
    }
}

/// Gaussian predictive distribution over the evaluation grid `X*`.
#[derive(Debug, Clone)]
pub struct PosteriorPredictive {
    pub xstar: Vec<f64>,
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
    /// Absolute jitter that was added to the observation Gram diagonal.
    pub jitter: f64,
}

impl PosteriorPredictive {
    pub fn variance(&self) -> DVector<f64> {
        self.covariance.diagonal()
    }

    /// Pointwise `mean ± z·sd` band.
    pub fn band(&self, z: f64) -> (Vec<f64>, Vec<f64>) {
        self.mean
            .iter()
            .zip(self.covariance.diagonal().iter())
            .map(|(&m, &v)| {
                let sd = v.max(0.0).sqrt();
                (m - z * sd, m + z * sd)
            })
            .unzip()
    }
}

/// Cholesky factor of `a + jitter·I`, escalating the jitter tenfold from
/// `BASE_JITTER·scale` up to `MAX_JITTER·scale`. Returns the factor and the
/// absolute jitter that succeeded.
pub(crate) fn cholesky_jittered(
    a: &DMatrix<f64>,
    scale: f64,
    matrix: &'static str,
) -> Result<(Cholesky<f64, Dyn>, f64)> {
    let mut rel = BASE_JITTER;
    loop {
        let jitter = rel * scale;
        let mut m = a.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += jitter;
        }
        if m.iter().all(|v| v.is_finite()) {
            if let Some(chol) = m.cholesky() {
                return Ok((chol, jitter));
            }
        }
        if rel >= MAX_JITTER * (1.0 - 1e-9) {
            return Err(Error::Conditioning { matrix, jitter });
        }
        rel *= 10.0;
    }
}

fn noisy_gram(obs: &ObservationSet, noise: &NoiseModel, spec: &KernelSpec) -> DMatrix<f64> {
    let mut a = spec.gram(obs.x(), obs.x());
    for i in 0..obs.len() {
        a[(i, i)] += noise.variance(i);
    }
    a
}

fn check_consistent(obs: &ObservationSet, noise: &NoiseModel) -> Result<()> {
    if noise.len() != obs.len() {
        return Err(Error::config(format!(
            "noise model has {} entries for {} observations",
            noise.len(),
            obs.len()
        )));
    }
    Ok(())
}

/// Conditions the zero-mean GP on `obs` and predicts at `xstar`.
pub fn posterior(
    obs: &ObservationSet,
    noise: &NoiseModel,
    spec: &KernelSpec,
    xstar: &[f64],
) -> Result<PosteriorPredictive> {
    spec.validate()?;
    let kss = spec.gram(xstar, xstar);
    if obs.is_empty() {
        return Ok(PosteriorPredictive {
            xstar: xstar.to_vec(),
            mean: DVector::zeros(xstar.len()),
            covariance: kss,
            jitter: 0.0,
        });
    }
    check_consistent(obs, noise)?;

    let a = noisy_gram(obs, noise, spec);
    let (chol, jitter) = cholesky_jittered(&a, spec.signal_variance, "observation covariance")?;
    let y = DVector::from_column_slice(obs.y());
    let alpha = chol.solve(&y);
    let ks = spec.gram(obs.x(), xstar);
    let mean = ks.tr_mul(&alpha);

    let v = chol
        .l_dirty()
        .solve_lower_triangular(&ks)
        .expect("cholesky factor has a positive diagonal");
    let mut cov = kss - v.tr_mul(&v);
    let n = cov.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (cov[(i, j)] + cov[(j, i)]);
            cov[(i, j)] = s;
            cov[(j, i)] = s;
        }
    }
    Ok(PosteriorPredictive {
        xstar: xstar.to_vec(),
        mean,
        covariance: cov,
        jitter,
    })
}

/// `count` curves drawn from a predictive distribution, one column per curve.
#[derive(Debug, Clone)]
pub struct PosteriorBatch {
    curves: DMatrix<f64>,
    /// Gradient score of each curve, filled in by the tracer.
    pub scores: Vec<f64>,
}

impl PosteriorBatch {
    pub fn from_curves(curves: Vec<Vec<f64>>) -> Self {
        let n = curves.first().map_or(0, Vec::len);
        assert!(curves.iter().all(|c| c.len() == n), "curves must share a grid");
        let flat: Vec<f64> = curves.into_iter().flatten().collect();
        let count = flat.len().checked_div(n).unwrap_or(0);
        PosteriorBatch {
            curves: DMatrix::from_vec(n, count, flat),
            scores: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.curves.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.ncols() == 0
    }

    /// Number of grid points per curve.
    pub fn grid_len(&self) -> usize {
        self.curves.nrows()
    }

    pub fn curve(&self, l: usize) -> &[f64] {
        let n = self.curves.nrows();
        &self.curves.as_slice()[l * n..(l + 1) * n]
    }

    pub fn curves(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.len()).map(move |l| self.curve(l))
    }
}

/// Draws `count` i.i.d. curves from `N(mean, covariance)`.
///
/// Curve `l` uses its own ChaCha stream `l` under `seed`, so each curve is a
/// pure function of `(seed, l)`.
pub fn sample_posterior(ppd: &PosteriorPredictive, count: usize, seed: u64) -> Result<PosteriorBatch> {
    if count == 0 {
        return Err(Error::config("curve count must be at least 1"));
    }
    let n = ppd.mean.len();
    let scale = ppd
        .covariance
        .diagonal()
        .iter()
        .fold(0.0f64, |acc, &v| acc.max(v));
    let mut curves = DMatrix::from_fn(n, count, |i, _| ppd.mean[i]);
    if scale <= 0.0 {
        return Ok(PosteriorBatch {
            curves,
            scores: Vec::new(),
        });
    }
    let (chol, _) = cholesky_jittered(&ppd.covariance, scale, "predictive covariance")?;
    let mut z = DMatrix::zeros(n, count);
    for l in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(l as u64);
        for i in 0..n {
            z[(i, l)] = StandardNormal.sample(&mut rng);
        }
    }
    curves.gemm(1.0, &chol.l(), &z, 1.0);
    Ok(PosteriorBatch {
        curves,
        scores: Vec::new(),
    })
}

/// Log marginal likelihood and its gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalLikelihood {
    pub value: f64,
    /// ∂/∂(σ_f², ℓ, σ_y²), with σ_y² the shared noise variance.
    pub gradient: [f64; 3],
    /// Relative jitter factor `c` in `A = K + diag(noise) + c·σ_f²·I`.
    pub jitter_factor: f64,
}

/// `log p(y | X, θ) = −½ yᵀA⁻¹y − ½ log|A| − (m/2) log 2π` with its analytic gradient.
///
/// The jitter is treated as `c·σ_f²`, so it is included in the σ_f² derivative.
pub fn log_marginal_likelihood(
    obs: &ObservationSet,
    noise: &NoiseModel,
    spec: &KernelSpec,
) -> Result<MarginalLikelihood> {
    spec.validate()?;
    if obs.is_empty() {
        return Err(Error::config("marginal likelihood needs at least one observation"));
    }
    check_consistent(obs, noise)?;
    let m = obs.len();
    let a = noisy_gram(obs, noise, spec);
    let (chol, jitter) = cholesky_jittered(&a, spec.signal_variance, "observation covariance")?;
    let jitter_factor = jitter / spec.signal_variance;

    let y = DVector::from_column_slice(obs.y());
    let alpha = chol.solve(&y);
    let half_log_det: f64 = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
    let value = -0.5 * y.dot(&alpha) - half_log_det - 0.5 * m as f64 * (2.0 * std::f64::consts::PI).ln();

    // ∂LML/∂θ = ½ tr((ααᵀ − A⁻¹) ∂A/∂θ)
    let a_inv = chol.inverse();
    let x = obs.x();
    let mut grad = [0.0; 3];
    for i in 0..m {
        for j in 0..m {
            let w = alpha[i] * alpha[j] - a_inv[(i, j)];
            let (ds, dl) = spec.eval_grad((x[i] - x[j]).abs());
            let ds = if i == j { ds + jitter_factor } else { ds };
            grad[0] += w * ds;
            grad[1] += w * dl;
        }
        if !noise.is_pinned(i) {
            grad[2] += alpha[i] * alpha[i] - a_inv[(i, i)];
        }
    }
    for g in &mut grad {
        *g *= 0.5;
    }
    Ok(MarginalLikelihood {
        value,
        gradient: grad,
        jitter_factor,
    })
}
