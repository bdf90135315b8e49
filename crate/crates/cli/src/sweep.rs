use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use gpet_core::eval::{sensitivity_sweep, SweepParameter};
use serde::Serialize;

use crate::config::{RunConfig, Source};
use crate::error::{CliError, CliResult};
use crate::output::create_dir;

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Run config; its tracer settings are the baseline and a synthetic source sets the case.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Parameter to perturb: threshold, curves, keep_ratio, bin_width, noise_variance,
    /// signal_variance, lengthscale or density_lengthscale.
    #[arg(long)]
    pub param: SweepParameter,
    /// Relative changes δ (the parameter becomes p·(1+δ)): a list `-0.5,0,1` or `START:STOP:STEP`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_range)]
    pub range: Deltas,
    /// First seed; runs use seeds `seed .. seed + repeats`.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub repeats: u64,
    /// Directory for sweep.csv; the table goes to stdout otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Deltas(pub Vec<f64>);

pub fn parse_range(s: &str) -> Result<Deltas, String> {
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    let parts: Vec<&str> = s.split(':').collect();
    let out = match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if !(step > 0.0) || stop < start {
                return Err("range START:STOP:STEP needs STEP > 0 and STOP ≥ START".into());
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            // rounded so that 0.1 steps print as 0.3, not 0.30000000000000004
            (0..=n).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect()
        }
        [list] => list.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
        _ => return Err(format!("expected a list or START:STOP:STEP, got {s:?}")),
    };
    if out.iter().any(|d| !d.is_finite()) {
        return Err("deltas must be finite".into());
    }
    Ok(Deltas(out))
}

#[derive(Serialize)]
struct CsvRow {
    parameter: String,
    delta: f64,
    seed: u64,
    jaccard: f64,
    runtime_s: f64,
}

pub fn run(args: &SweepArgs) -> CliResult<()> {
    let cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let Source::Synthetic(case) = &cfg.source else {
        return Err(CliError::config("sweeps run on the synthetic case; the config source must be synthetic"));
    };
    let first = args.seed.or(cfg.seed).unwrap_or(0);
    let seeds: Vec<u64> = (0..args.repeats.max(1)).map(|i| first + i).collect();
    let report = sensitivity_sweep(&cfg.tracer, case, args.param, &args.range.0, &seeds)?;
    for note in &report.notes {
        eprintln!("note: {note}");
    }

    let sink: Box<dyn Write> = match &args.out {
        Some(dir) => {
            create_dir(dir)?;
            let path = dir.join("sweep.csv");
            Box::new(std::fs::File::create(&path).map_err(|e| CliError::io(&path, e))?)
        }
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let failed = |e: csv::Error| CliError {
        code: crate::error::EXIT_IO,
        message: format!("writing sweep table: {e}"),
    };
    for r in &report.rows {
        w.serialize(CsvRow {
            parameter: r.parameter.name().into(),
            delta: r.delta,
            seed: r.seed,
            jaccard: r.jaccard,
            runtime_s: r.runtime_s,
        })
        .map_err(failed)?;
    }
    w.flush().map_err(|e| failed(e.into()))?;
    if args.out.is_some() {
        for (delta, mean) in report.mean_by_delta() {
            println!("{} δ = {delta:+}: mean Jaccard {:.2}%", args.param, 100.0 * mean);
        }
    }
    Ok(())
}
