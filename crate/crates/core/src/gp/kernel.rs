//! Stationary isotropic covariance functions.
//!
//! All kernels depend only on the distance `r = |x - x'|` and are scaled by
//! the signal variance, so `k(0) = signal_variance`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    SquaredExponential,
    /// Matérn with smoothness ν = 3/2.
    Matern32,
    /// Matérn with smoothness ν = 5/2.
    Matern52,
}

impl KernelFamily {
    /// Matérn family for a half-integer smoothness. Only 1.5 and 2.5 are supported.
    pub fn matern(nu: f64) -> Result<Self> {
        if nu == 1.5 {
            Ok(KernelFamily::Matern32)
        } else if nu == 2.5 {
            Ok(KernelFamily::Matern52)
        } else {
            Err(Error::config(format!(
                "unsupported Matérn smoothness nu = {nu}; expected 1.5 or 2.5"
            )))
        }
    }

    pub fn nu(self) -> Option<f64> {
        match self {
            KernelFamily::SquaredExponential => None,
            KernelFamily::Matern32 => Some(1.5),
            KernelFamily::Matern52 => Some(2.5),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub family: KernelFamily,
    /// σ_f², in squared pixels.
    pub signal_variance: f64,
    /// ℓ, in pixels.
    pub lengthscale: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, signal_variance: f64, lengthscale: f64) -> Result<Self> {
        let spec = KernelSpec {
            family,
            signal_variance,
            lengthscale,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn squared_exponential(signal_variance: f64, lengthscale: f64) -> Result<Self> {
        Self::new(KernelFamily::SquaredExponential, signal_variance, lengthscale)
    }

    pub fn matern(nu: f64, signal_variance: f64, lengthscale: f64) -> Result<Self> {
        Self::new(KernelFamily::matern(nu)?, signal_variance, lengthscale)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.signal_variance.is_finite() && self.signal_variance > 0.0) {
            return Err(Error::config(format!(
                "signal variance must be positive and finite, got {}",
                self.signal_variance
            )));
        }
        if !(self.lengthscale.is_finite() && self.lengthscale > 0.0) {
            return Err(Error::config(format!(
                "lengthscale must be positive and finite, got {}",
                self.lengthscale
            )));
        }
        Ok(())
    }

    /// k(r). Assumes a validated spec and `r >= 0`.
    pub fn eval(&self, r: f64) -> f64 {
        let s = self.signal_variance;
        let l = self.lengthscale;
        match self.family {
            KernelFamily::SquaredExponential => s * (-0.5 * (r / l).powi(2)).exp(),
            KernelFamily::Matern32 => {
                let a = 3f64.sqrt() * r / l;
                s * (1.0 + a) * (-a).exp()
            }
            KernelFamily::Matern52 => {
                let a = 5f64.sqrt() * r / l;
                s * (1.0 + a + a * a / 3.0) * (-a).exp()
            }
        }
    }

    /// (∂k/∂σ_f², ∂k/∂ℓ) at distance `r`.
    pub fn eval_grad(&self, r: f64) -> (f64, f64) {
        let s = self.signal_variance;
        let l = self.lengthscale;
        let k = self.eval(r);
        let dl = match self.family {
            KernelFamily::SquaredExponential => k * r * r / (l * l * l),
            KernelFamily::Matern32 => {
                let a = 3f64.sqrt() * r / l;
                s * a * a * (-a).exp() / l
            }
            KernelFamily::Matern52 => {
                let a = 5f64.sqrt() * r / l;
                s * a * a * (1.0 + a) * (-a).exp() / (3.0 * l)
            }
        };
        (k / s, dl)
    }

    /// Gram matrix `[k(|a_i - b_j|)]_ij`.
    pub fn gram(&self, a: &[f64], b: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(a.len(), b.len(), |i, j| self.eval((a[i] - b[j]).abs()))
    }
}

/// Checked kernel evaluation.
pub fn kernel_eval(spec: &KernelSpec, r: f64) -> Result<f64> {
    spec.validate()?;
    if !(r >= 0.0) {
        return Err(Error::config(format!("distance must be non-negative, got {r}")));
    }
    Ok(spec.eval(r))
}

/// Checked Gram matrix between two non-empty input vectors.
pub fn gram(spec: &KernelSpec, a: &[f64], b: &[f64]) -> Result<DMatrix<f64>> {
    spec.validate()?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::config("gram inputs must be non-empty"));
    }
    Ok(spec.gram(a, b))
}
