//! The run configuration file.

use std::path::{Path, PathBuf};

use gpet_core::image::SinusoidParams;
use gpet_core::tracer::TraceConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Overrides the tracer and synthetic seeds; `--seed` overrides this.
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    /// Initial edge pixels as `[column, row]` image coordinates.
    pub endpoints: Vec<(f64, f64)>,
    pub source: Source,
    pub polar: Option<PolarConfig>,
    pub tracer: TraceConfig,
}

/// Where the gradient field comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Source {
    /// An intensity image; the gradient is its smoothed Sobel magnitude.
    Image { path: Option<PathBuf> },
    /// A precomputed gradient magnitude image.
    Gradient { path: Option<PathBuf> },
    /// A generated sinusoid test case.
    Synthetic(SinusoidParams),
}

impl Default for Source {
    fn default() -> Self {
        Source::Synthetic(SinusoidParams::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolarConfig {
    /// Centre as `[column, row]`.
    pub center: (f64, f64),
    /// Defaults to about one sample per pixel of radius.
    #[serde(default)]
    pub radial_samples: Option<usize>,
    #[serde(default = "default_angular_samples")]
    pub angular_samples: usize,
}

fn default_angular_samples() -> usize {
    720
}

impl PolarConfig {
    pub fn at(center: (f64, f64)) -> Self {
        PolarConfig {
            center,
            radial_samples: None,
            angular_samples: default_angular_samples(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file. Relative paths inside it are taken relative to the file.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::parse(&text).map_err(|e| CliError::config(format!("{}: {}", path.display(), e.message)))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match &mut cfg.source {
            Source::Image { path: Some(p) } | Source::Gradient { path: Some(p) } => resolve(p),
            _ => {}
        }
        if let Some(p) = &mut cfg.output {
            resolve(p);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.tracer.validate()?;
        if let Source::Synthetic(p) = &self.source {
            p.validate()?;
        }
        if let Some(polar) = &self.polar {
            if polar.angular_samples < 3 || polar.radial_samples.is_some_and(|r| r < 2) {
                return Err(CliError::config(
                    "polar mode needs at least 3 angular and 2 radial samples",
                ));
            }
        }
        if self.endpoints.iter().any(|&(c, r)| !(c.is_finite() && r.is_finite() && c >= 0.0)) {
            return Err(CliError::config("endpoints must be finite [column, row] pairs"));
        }
        Ok(())
    }
}
