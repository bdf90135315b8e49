use std::path::PathBuf;

use clap::Args;
use gpet_core::image::{make_sinusoid_case, save_grayscale, SinusoidParams};

use crate::error::{CliError, CliResult};
use crate::output::{create_dir, write_points_csv};

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Directory for image.png, gradient.png, truth.csv and case.toml.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub height: Option<usize>,
    #[arg(long)]
    pub width: Option<usize>,
    /// Peak deviation of the edge from the middle row, pixels.
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub periods: Option<f64>,
    /// Standard deviation of the pixel noise.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Inclusive column span `A:B` with the gradient erased. Repeatable; replaces the default spans.
    #[arg(long = "occlusion", value_name = "A:B", value_parser = parse_span)]
    pub occlusions: Vec<(usize, usize)>,
    /// Generate without any occlusion.
    #[arg(long, conflicts_with = "occlusions")]
    pub no_occlusions: bool,
}

pub fn parse_span(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected A:B, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((parse(a)?, parse(b)?))
}

impl GenerateArgs {
    pub fn params(&self) -> SinusoidParams {
        let d = SinusoidParams::default();
        SinusoidParams {
            height: self.height.unwrap_or(d.height),
            width: self.width.unwrap_or(d.width),
            amplitude: self.amplitude.unwrap_or(d.amplitude),
            periods: self.periods.unwrap_or(d.periods),
            noise_level: self.noise.unwrap_or(d.noise_level),
            occlusion_spans: if self.no_occlusions {
                Vec::new()
            } else if self.occlusions.is_empty() {
                d.occlusion_spans
            } else {
                self.occlusions.clone()
            },
            seed: self.seed,
        }
    }
}

pub fn run(args: &GenerateArgs) -> CliResult<()> {
    let params = args.params();
    let case = make_sinusoid_case(&params)?;
    create_dir(&args.out)?;
    save_grayscale(args.out.join("image.png"), &case.image)?;
    save_grayscale(args.out.join("gradient.png"), case.gradient.grid())?;
    write_points_csv(&args.out.join("truth.csv"), case.truth.iter().copied().enumerate())?;
    let path = args.out.join("case.toml");
    let text = toml::to_string(&params).map_err(|e| CliError::config(e.to_string()))?;
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    println!(
        "wrote {}x{} sinusoid case (seed {}) to {}",
        params.height,
        params.width,
        params.seed,
        args.out.display()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spans_parse() {
        assert_eq!(parse_span("100:150"), Ok((100, 150)));
        assert!(parse_span("100-150").is_err());
        assert!(parse_span("a:3").is_err());
    }
}
