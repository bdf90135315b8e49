use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use gpet_core::eval::trace_jaccard;
use gpet_core::image::{
    gradient_magnitude, load_grayscale, make_sinusoid_case, to_polar, trace_from_polar, GradientField, Grid,
    PolarGeometry, SinusoidParams,
};
use gpet_core::tracer::{
    trace, trace_sequence, EdgePoint, FittedHyperparameters, IterationRecord, Propagation, StopReason, TraceConfig,
    TraceResult,
};
use serde::Serialize;

use crate::config::{PolarConfig, RunConfig, Source};
use crate::error::{CliError, CliResult};
use crate::output::{
    create_dir, open_curve, read_points_csv, write_contour_csv, write_json, write_points_csv, write_trace_csv,
    Overlay, BAND_COLOUR, MEAN_COLOUR,
};

#[derive(Debug, Args)]
pub struct TraceArgs {
    /// Run config (TOML).
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Precomputed gradient magnitude image, used instead of the source's gradient.
    #[arg(long)]
    pub gradient: Option<PathBuf>,
    /// Trace a closed edge in polar coordinates about `X,Y`.
    #[arg(long, value_name = "X,Y", value_parser = parse_center)]
    pub polar_center: Option<(f64, f64)>,
    /// Initial edge pixels (CSV with `column` and `row` or `mean`), in place of the endpoints.
    #[arg(long, value_name = "FILE")]
    pub init_pixels: Option<PathBuf>,
    /// Keep every K-th initial pixel; in sequence mode, every K-th pixel of the previous frame.
    #[arg(long, value_name = "K", default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub stride: u64,
    /// Image frames to trace in sequence. Read as the config source kind (image or gradient).
    pub frames: Vec<PathBuf>,
}

pub fn parse_center(s: &str) -> Result<(f64, f64), String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected X,Y, got {s:?}"))?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok((num(x)?, num(y)?))
}

struct Frame {
    name: String,
    /// Drawn under the overlay.
    backdrop: Grid,
    gradient: GradientField,
    truth: Option<Vec<f64>>,
}

fn load_frame(kind: &Source, path: &Path) -> CliResult<Frame> {
    let img = load_grayscale(path)?;
    let name = path.file_stem().map_or("frame".into(), |s| s.to_string_lossy().into_owned());
    let gradient = match kind {
        Source::Gradient { .. } => GradientField::normalized(img.clone()),
        _ => gradient_magnitude(&img),
    };
    Ok(Frame {
        name,
        backdrop: img,
        gradient,
        truth: None,
    })
}

fn load_frames(cfg: &RunConfig, args: &TraceArgs, seed: u64) -> CliResult<Vec<Frame>> {
    let mut frames = if !args.frames.is_empty() {
        if matches!(cfg.source, Source::Synthetic(_)) {
            return Err(CliError::config(
                "frames given on the command line need a source of kind \"image\" or \"gradient\"",
            ));
        }
        args.frames.iter().map(|p| load_frame(&cfg.source, p)).collect::<CliResult<Vec<_>>>()?
    } else {
        match &cfg.source {
            Source::Image { path: Some(p) } | Source::Gradient { path: Some(p) } => vec![load_frame(&cfg.source, p)?],
            Source::Image { path: None } | Source::Gradient { path: None } => {
                return Err(CliError::config("the source has no path and no frames were given"))
            }
            Source::Synthetic(params) => {
                let case = make_sinusoid_case(&SinusoidParams {
                    seed,
                    ..params.clone()
                })?;
                vec![Frame {
                    name: "synthetic".into(),
                    backdrop: case.image,
                    gradient: case.gradient,
                    truth: Some(case.truth),
                }]
            }
        }
    };
    if let Some(p) = &args.gradient {
        let [frame] = frames.as_mut_slice() else {
            return Err(CliError::config("--gradient applies to a single frame"));
        };
        let g = GradientField::normalized(load_grayscale(p)?);
        let (expected, found) = (frame.backdrop.shape(), (g.height(), g.width()));
        if expected != found {
            return Err(gpet_core::Error::Shape { expected, found }.into());
        }
        frame.gradient = g;
    }
    Ok(frames)
}

/// Every `stride`-th point, always keeping the last.
fn every_kth(points: Vec<EdgePoint>, stride: usize) -> Vec<EdgePoint> {
    let mut out: Vec<EdgePoint> = points.iter().step_by(stride.max(1)).copied().collect();
    if let (Some(last), Some(kept)) = (points.last(), out.last()) {
        if kept.col != last.col {
            out.push(*last);
        }
    }
    out
}

/// Maps Cartesian endpoints into polar `(angle column, radius row)` pixels. A point
/// on the ray at angle 0 is repeated at the last angle column to close the contour.
fn polar_points(points: &[(f64, f64)], geometry: &PolarGeometry) -> Vec<EdgePoint> {
    let a = geometry.angular_samples;
    let mut out: Vec<EdgePoint> = points
        .iter()
        .map(|&(x, y)| {
            let (r, t) = geometry.to_polar(x, y);
            EdgePoint::new(t.round() as usize % a, r)
        })
        .collect();
    if let Some(p) = out.iter().find(|p| p.col == 0).copied() {
        if !out.iter().any(|q| q.col == a - 1) {
            out.push(EdgePoint::new(a - 1, p.row));
        }
    }
    out
}

fn polar_geometry(polar: &PolarConfig, height: usize, width: usize) -> CliResult<PolarGeometry> {
    let probe = PolarGeometry::new(height, width, polar.center, 2, polar.angular_samples)?;
    let radial = polar
        .radial_samples
        .unwrap_or(probe.max_radius.ceil() as usize + 1);
    Ok(PolarGeometry::new(height, width, polar.center, radial, polar.angular_samples)?)
}

fn initial_points(
    cfg: &RunConfig,
    args: &TraceArgs,
    frame: &Frame,
    geometry: Option<&PolarGeometry>,
) -> CliResult<Vec<EdgePoint>> {
    if let Some(path) = &args.init_pixels {
        let pts = read_points_csv(path)?
            .into_iter()
            .map(|(c, r)| EdgePoint::new(c, r.round()))
            .collect();
        return Ok(every_kth(pts, args.stride as usize));
    }
    let ends: Vec<(f64, f64)> = if !cfg.endpoints.is_empty() {
        cfg.endpoints.clone()
    } else if let (Some(truth), None) = (&frame.truth, geometry) {
        let last = truth.len() - 1;
        vec![(0.0, truth[0].round()), (last as f64, truth[last].round())]
    } else {
        return Err(CliError::config(
            "no endpoints: set `endpoints = [[column, row], ...]` in the config or pass --init-pixels",
        ));
    };
    Ok(match geometry {
        Some(g) => polar_points(&ends, g),
        None => ends.iter().map(|&(c, r)| EdgePoint::new(c.round() as usize, r)).collect(),
    })
}

#[derive(Serialize)]
struct FrameReport {
    frame: String,
    converged: bool,
    stop_reason: Option<StopReason>,
    iterations: Option<usize>,
    final_threshold: Option<f64>,
    observations: Option<usize>,
    theta_hat: Option<FittedHyperparameters>,
    jaccard: Option<f64>,
    error: Option<String>,
    diagnostics: Vec<IterationRecord>,
}

#[derive(Serialize)]
struct RunReport<'a> {
    seed: u64,
    runtime_s: f64,
    tracer: &'a TraceConfig,
    polar: Option<&'a PolarConfig>,
    frames: Vec<FrameReport>,
}

fn write_frame(
    dir: &Path,
    frame: &Frame,
    result: &TraceResult,
    geometry: Option<&PolarGeometry>,
) -> CliResult<Option<f64>> {
    create_dir(dir)?;
    write_trace_csv(&dir.join("trace.csv"), &result.mean, &result.lower, &result.upper)?;
    write_points_csv(
        &dir.join("observations.csv"),
        result.observations.iter().map(|p| (p.col, p.row)),
    )?;
    let mut overlay = Overlay::new(&frame.backdrop);
    let jaccard = match geometry {
        Some(g) => {
            let contour = trace_from_polar(&result.mean, g);
            write_contour_csv(&dir.join("contour.csv"), &contour)?;
            overlay.polyline(&trace_from_polar(&result.lower, g), true, BAND_COLOUR);
            overlay.polyline(&trace_from_polar(&result.upper, g), true, BAND_COLOUR);
            overlay.polyline(&contour, true, MEAN_COLOUR);
            None
        }
        None => {
            overlay.polyline(&open_curve(&result.lower), false, BAND_COLOUR);
            overlay.polyline(&open_curve(&result.upper), false, BAND_COLOUR);
            overlay.polyline(&open_curve(&result.mean), false, MEAN_COLOUR);
            match &frame.truth {
                Some(t) => Some(trace_jaccard(&result.mean, t, frame.backdrop.height())?),
                None => None,
            }
        }
    };
    overlay.save(&dir.join("overlay.png"))?;
    Ok(jaccard)
}

pub fn run(args: &TraceArgs) -> CliResult<()> {
    let t0 = Instant::now();
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(c) = args.polar_center {
        cfg.polar = Some(match cfg.polar.take() {
            Some(p) => PolarConfig { center: c, ..p },
            None => PolarConfig::at(c),
        });
    }
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let tracer = TraceConfig {
        seed,
        ..cfg.tracer.clone()
    };
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("gpet-out"));

    let frames = load_frames(&cfg, args, seed)?;
    let (h, w) = frames[0].backdrop.shape();
    let geometry = cfg.polar.as_ref().map(|p| polar_geometry(p, h, w)).transpose()?;
    let fields: Vec<GradientField> = frames
        .iter()
        .map(|f| match &geometry {
            Some(g) => to_polar(f.gradient.grid(), g.center, g.radial_samples, g.angular_samples)
                .map(|p| GradientField::normalized(p.grid)),
            None => Ok(f.gradient.clone()),
        })
        .collect::<Result<_, _>>()?;
    let init = initial_points(&cfg, args, &frames[0], geometry.as_ref())?;

    let results = if fields.len() == 1 {
        vec![trace(&tracer, &fields[0], &init)]
    } else {
        trace_sequence(&tracer, &fields, &init, Propagation::Stride(args.stride as usize))
    };

    create_dir(&out)?;
    let mut reports = Vec::new();
    let mut first_error: Option<CliError> = None;
    for (i, (frame, result)) in frames.iter().zip(results).enumerate() {
        let dir = if frames.len() == 1 {
            out.clone()
        } else {
            out.join(format!("frame_{i:03}"))
        };
        let report = match result {
            Ok(r) => {
                let jaccard = write_frame(&dir, frame, &r, geometry.as_ref())?;
                let mut line = format!("{}: {} iterations, {:?}", frame.name, r.iterations, r.stop_reason);
                if let Some(j) = jaccard {
                    line += &format!(", Jaccard {:.2}%", 100.0 * j);
                }
                println!("{line}");
                if !r.converged() {
                    eprintln!("warning: {} did not converge ({:?}); the result is flagged in the report", frame.name, r.stop_reason);
                }
                FrameReport {
                    frame: frame.name.clone(),
                    converged: r.converged(),
                    stop_reason: Some(r.stop_reason),
                    iterations: Some(r.iterations),
                    final_threshold: Some(r.final_threshold),
                    observations: Some(r.observations.len()),
                    theta_hat: Some(r.theta_hat),
                    jaccard,
                    error: None,
                    diagnostics: r.diagnostics,
                }
            }
            Err(e) => {
                eprintln!("error: {}: {e}", frame.name);
                let report = FrameReport {
                    frame: frame.name.clone(),
                    converged: false,
                    stop_reason: None,
                    iterations: None,
                    final_threshold: None,
                    observations: None,
                    theta_hat: None,
                    jaccard: None,
                    error: Some(e.to_string()),
                    diagnostics: Vec::new(),
                };
                first_error.get_or_insert(e.into());
                report
            }
        };
        reports.push(report);
    }
    write_json(
        &out.join("report.json"),
        &RunReport {
            seed,
            runtime_s: t0.elapsed().as_secs_f64(),
            tracer: &tracer,
            polar: cfg.polar.as_ref(),
            frames: reports,
        },
    )?;
    match first_error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}
