use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{case_endpoints, trace_jaccard};
use crate::error::{Error, Result};
use crate::image::{make_sinusoid_case, SinusoidParams, SyntheticCase};
use crate::tracer::{trace, TraceConfig};

/// The tunable tracer parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Threshold,
    Curves,
    KeepRatio,
    BinWidth,
    NoiseVariance,
    SignalVariance,
    Lengthscale,
    DensityLengthscale,
}

impl SweepParameter {
    pub const ALL: [SweepParameter; 8] = [
        SweepParameter::Threshold,
        SweepParameter::Curves,
        SweepParameter::KeepRatio,
        SweepParameter::BinWidth,
        SweepParameter::NoiseVariance,
        SweepParameter::SignalVariance,
        SweepParameter::Lengthscale,
        SweepParameter::DensityLengthscale,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::Threshold => "threshold",
            SweepParameter::Curves => "curves",
            SweepParameter::KeepRatio => "keep_ratio",
            SweepParameter::BinWidth => "bin_width",
            SweepParameter::NoiseVariance => "noise_variance",
            SweepParameter::SignalVariance => "signal_variance",
            SweepParameter::Lengthscale => "lengthscale",
            SweepParameter::DensityLengthscale => "density_lengthscale",
        }
    }

    pub fn value(&self, c: &TraceConfig) -> f64 {
        match self {
            SweepParameter::Threshold => c.threshold,
            SweepParameter::Curves => c.curves as f64,
            SweepParameter::KeepRatio => c.keep_ratio,
            SweepParameter::BinWidth => c.bin_width as f64,
            SweepParameter::NoiseVariance => c.noise_variance,
            SweepParameter::SignalVariance => c.kernel.signal_variance,
            SweepParameter::Lengthscale => c.kernel.lengthscale,
            SweepParameter::DensityLengthscale => c.density_lengthscale,
        }
    }

    /// Sets the parameter to `value` (counts are rounded) and validates the result.
    pub fn with_value(&self, base: &TraceConfig, value: f64) -> Result<TraceConfig> {
        let mut c = base.clone();
        let count = |v: f64| -> Result<usize> {
            if v.is_finite() && v >= 0.5 {
                Ok(v.round() as usize)
            } else {
                Err(Error::config(format!("{} must be a positive count, got {v}", self.name())))
            }
        };
        match self {
            SweepParameter::Threshold => c.threshold = value,
            SweepParameter::Curves => c.curves = count(value)?,
            SweepParameter::KeepRatio => c.keep_ratio = value,
            SweepParameter::BinWidth => c.bin_width = count(value)?,
            SweepParameter::NoiseVariance => c.noise_variance = value,
            SweepParameter::SignalVariance => c.kernel.signal_variance = value,
            SweepParameter::Lengthscale => c.kernel.lengthscale = value,
            SweepParameter::DensityLengthscale => c.density_lengthscale = value,
        }
        c.validate()?;
        Ok(c)
    }

    /// `p = p₀ (1 + δ)`.
    pub fn perturb(&self, base: &TraceConfig, delta: f64) -> Result<TraceConfig> {
        self.with_value(base, self.value(base) * (1.0 + delta))
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepParameter::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = SweepParameter::ALL.iter().map(|p| p.name()).collect();
                Error::config(format!("unknown parameter '{s}', expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: SweepParameter,
    pub delta: f64,
    pub value: f64,
    pub seed: u64,
    /// 0 when the trace failed outright.
    pub jaccard: f64,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Perturbations that were skipped or failed, with the reason.
    pub notes: Vec<String>,
}

impl SweepReport {
    /// Mean Jaccard per delta, in first-seen order.
    pub fn mean_by_delta(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64, usize)> = Vec::new();
        for r in &self.rows {
            match out.iter_mut().find(|(d, _, _)| *d == r.delta) {
                Some(e) => {
                    e.1 += r.jaccard;
                    e.2 += 1;
                }
                None => out.push((r.delta, r.jaccard, 1)),
            }
        }
        out.into_iter().map(|(d, s, n)| (d, s / n as f64)).collect()
    }
}

/// Re-traces the synthetic case with one parameter scaled by `1 + δ` for each
/// delta and seed. The seed drives both the case noise and the tracer.
pub fn sensitivity_sweep(
    base: &TraceConfig,
    case_params: &SinusoidParams,
    parameter: SweepParameter,
    deltas: &[f64],
    seeds: &[u64],
) -> Result<SweepReport> {
    base.validate()?;
    let cases: Vec<(u64, SyntheticCase)> = seeds
        .iter()
        .map(|&s| {
            let p = SinusoidParams {
                seed: s,
                ..case_params.clone()
            };
            make_sinusoid_case(&p).map(|c| (s, c))
        })
        .collect::<Result<_>>()?;

    let mut report = SweepReport::default();
    for &delta in deltas {
        let config = match parameter.perturb(base, delta) {
            Ok(c) => c,
            Err(e) => {
                report.notes.push(format!("{parameter} delta {delta}: skipped ({e})"));
                continue;
            }
        };
        for (seed, case) in &cases {
            let config = TraceConfig { seed: *seed, ..config.clone() };
            let t0 = Instant::now();
            let jaccard = match trace(&config, &case.gradient, &case_endpoints(case)) {
                Ok(r) => trace_jaccard(&r.mean, &case.truth, case_params.height)?,
                Err(e) => {
                    report.notes.push(format!("{parameter} delta {delta} seed {seed}: trace failed ({e})"));
                    0.0
                }
            };
            report.rows.push(SweepRow {
                parameter,
                delta,
                value: parameter.value(&config),
                seed: *seed,
                jaccard,
                runtime_s: t0.elapsed().as_secs_f64(),
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for p in SweepParameter::ALL {
            assert_eq!(p.name().parse::<SweepParameter>().unwrap(), p);
        }
        assert!("sigma".parse::<SweepParameter>().is_err());
    }

    #[test]
    fn perturbation_scales_and_validates() {
        let base = TraceConfig::default();
        let c = SweepParameter::Curves.perturb(&base, 1.0).unwrap();
        assert_eq!(c.curves, 1000);
        let c = SweepParameter::Lengthscale.perturb(&base, -0.5).unwrap();
        assert_eq!(c.kernel.lengthscale, 10.0);
        assert!(SweepParameter::Threshold.perturb(&base, 1.0).is_err());
        assert!(SweepParameter::BinWidth.perturb(&base, -1.0).is_err());
    }

    #[test]
    fn invalid_perturbations_are_skipped_with_a_note() {
        let params = SinusoidParams {
            height: 40,
            width: 60,
            amplitude: 8.0,
            periods: 1.0,
            noise_level: 0.0,
            occlusion_spans: vec![],
            seed: 0,
        };
        let base = TraceConfig {
            kernel: crate::gp::KernelSpec::matern(2.5, 100.0, 15.0).unwrap(),
            curves: 100,
            ..TraceConfig::default()
        };
        let r = sensitivity_sweep(&base, &params, SweepParameter::Threshold, &[0.0, 2.0], &[1]).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.notes.len(), 1);
        assert!(r.rows[0].jaccard > 0.9);
        let again = sensitivity_sweep(&base, &params, SweepParameter::Threshold, &[0.0], &[1]).unwrap();
        assert_eq!(again.rows[0].jaccard, r.rows[0].jaccard);
    }
}
