use std::path::{Path, PathBuf};

use clap::Args;
use gpet_core::eval::{compare_methods, DEFAULT_STEP_PENALTY};
use gpet_core::image::{gradient_magnitude, load_grayscale, make_sinusoid_case, GradientField, Grid, SinusoidParams};
use gpet_core::tracer::{EdgePoint, TraceConfig};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{
    create_dir, open_curve, read_points_csv, write_json, write_points_csv, write_trace_csv, Overlay, BASELINE_COLOUR,
    MEAN_COLOUR,
};

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Case directory: `case.toml` from `gpet generate`, or `truth.csv` with `image.png` or `gradient.png`.
    pub case: PathBuf,
    /// Run config whose tracer settings are used.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Step penalty of the Dijkstra baseline.
    #[arg(long, default_value_t = DEFAULT_STEP_PENALTY)]
    pub step_penalty: f64,
    /// Directory for comparison.csv, both traces, an overlay and a JSON report.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

struct Case {
    backdrop: Grid,
    gradient: GradientField,
    truth: Vec<f64>,
}

fn load_case(dir: &Path) -> CliResult<Case> {
    if !dir.is_dir() {
        return Err(CliError::io(dir, "not a directory"));
    }
    let params_path = dir.join("case.toml");
    if params_path.is_file() {
        let text = std::fs::read_to_string(&params_path).map_err(|e| CliError::io(&params_path, e))?;
        let params: SinusoidParams =
            toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", params_path.display())))?;
        let case = make_sinusoid_case(&params)?;
        return Ok(Case {
            backdrop: case.image,
            gradient: case.gradient,
            truth: case.truth,
        });
    }
    let truth_path = dir.join("truth.csv");
    if !truth_path.is_file() {
        return Err(CliError::io(dir, "no case.toml or truth.csv in the case directory"));
    }
    let (backdrop, gradient) = if dir.join("gradient.png").is_file() {
        let g = load_grayscale(dir.join("gradient.png"))?;
        let backdrop = match dir.join("image.png") {
            p if p.is_file() => load_grayscale(p)?,
            _ => g.clone(),
        };
        (backdrop, GradientField::normalized(g))
    } else if dir.join("image.png").is_file() {
        let img = load_grayscale(dir.join("image.png"))?;
        let g = gradient_magnitude(&img);
        (img, g)
    } else {
        return Err(CliError::io(dir, "no image.png or gradient.png in the case directory"));
    };
    let points = read_points_csv(&truth_path)?;
    let width = gradient.width();
    if points.len() != width || points.iter().enumerate().any(|(i, &(c, _))| c != i) {
        return Err(CliError::config(format!(
            "{}: expected one row for each column 0..{width}",
            truth_path.display()
        )));
    }
    Ok(Case {
        backdrop,
        gradient,
        truth: points.into_iter().map(|(_, r)| r).collect(),
    })
}

#[derive(Serialize)]
struct TableRow<'a> {
    method: &'a str,
    jaccard_pct: f64,
    time_s: f64,
}

pub fn run(args: &EvaluateArgs) -> CliResult<()> {
    let cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let tracer = TraceConfig { seed, ..cfg.tracer };
    let case = load_case(&args.case)?;
    let last = case.truth.len() - 1;
    let endpoints = [
        EdgePoint::new(0, case.truth[0].round()),
        EdgePoint::new(last, case.truth[last].round()),
    ];
    let cmp = compare_methods(&tracer, &case.gradient, &endpoints, &case.truth, args.step_penalty)?;
    if !cmp.trace.converged() {
        eprintln!("warning: the tracer did not converge ({:?})", cmp.trace.stop_reason);
    }

    let rows = [&cmp.proposed, &cmp.dijkstra].map(|m| TableRow {
        method: &m.method,
        jaccard_pct: 100.0 * m.jaccard,
        time_s: m.runtime_s,
    });
    println!("{:<10} {:>8} {:>9}", "method", "J (%)", "Time (s)");
    for r in &rows {
        println!("{:<10} {:>8.2} {:>9.3}", r.method, r.jaccard_pct, r.time_s);
    }

    if let Some(out) = &args.out {
        create_dir(out)?;
        let path = out.join("comparison.csv");
        let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::io(&path, e))?;
        for r in &rows {
            w.serialize(r).map_err(|e| CliError::io(&path, e))?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
        let t = &cmp.trace;
        write_trace_csv(&out.join("trace.csv"), &t.mean, &t.lower, &t.upper)?;
        write_points_csv(&out.join("dijkstra.csv"), cmp.dijkstra_trace.iter().copied().enumerate())?;
        let mut overlay = Overlay::new(&case.backdrop);
        overlay.polyline(&open_curve(&cmp.dijkstra_trace), false, BASELINE_COLOUR);
        overlay.polyline(&open_curve(&t.mean), false, MEAN_COLOUR);
        overlay.save(&out.join("overlay.png"))?;
        write_json(
            &out.join("report.json"),
            &serde_json::json!({
                "seed": seed,
                "tracer": tracer,
                "methods": [cmp.proposed, cmp.dijkstra],
                "converged": t.converged(),
                "stop_reason": t.stop_reason,
                "iterations": t.iterations,
                "theta_hat": t.theta_hat,
            }),
        )?;
    }
    Ok(())
}
