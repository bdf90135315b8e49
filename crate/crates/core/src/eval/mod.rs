//! Metrics, the Dijkstra baseline and the sensitivity sweep.

mod dijkstra;
mod mask;
mod sweep;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use dijkstra::{dijkstra_trace, shortest_path, Pixel, PixelPath, DEFAULT_STEP_PENALTY};
pub use mask::{jaccard, rasterize, rasterize_closed, RegionMask, Side};
pub use sweep::{sensitivity_sweep, SweepParameter, SweepReport, SweepRow};

use crate::error::Result;
use crate::image::{GradientField, SyntheticCase};
use crate::tracer::{trace, EdgePoint, TraceConfig, TraceResult};

/// Jaccard score of the regions below two open traces.
pub fn trace_jaccard(trace: &[f64], truth: &[f64], height: usize) -> Result<f64> {
    let width = truth.len();
    jaccard(
        &rasterize(trace, height, width, Side::Below)?,
        &rasterize(truth, height, width, Side::Below)?,
    )
}

/// Endpoints of a synthetic case: the true edge row, rounded, at the first
/// and last column.
pub fn case_endpoints(case: &SyntheticCase) -> [EdgePoint; 2] {
    let last = case.truth.len() - 1;
    [
        EdgePoint::new(0, case.truth[0].round()),
        EdgePoint::new(last, case.truth[last].round()),
    ]
}

/// Row clamped to the image, for turning a real endpoint into a pixel.
fn endpoint_pixel(p: &EdgePoint, height: usize) -> Pixel {
    Pixel::new(p.row.round().clamp(0.0, (height - 1) as f64) as usize, p.col)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodScore {
    pub method: String,
    pub jaccard: f64,
    pub runtime_s: f64,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub proposed: MethodScore,
    pub dijkstra: MethodScore,
    pub trace: TraceResult,
    pub dijkstra_trace: Vec<f64>,
}

/// Runs the tracer and the Dijkstra baseline between the same endpoints and
/// scores both against `truth`.
pub fn compare_methods(
    config: &TraceConfig,
    gradient: &GradientField,
    endpoints: &[EdgePoint; 2],
    truth: &[f64],
    step_penalty: f64,
) -> Result<Comparison> {
    let h = gradient.height();
    let t0 = Instant::now();
    let result = trace(config, gradient, endpoints)?;
    let proposed = MethodScore {
        method: "gp".into(),
        jaccard: trace_jaccard(&result.mean, truth, h)?,
        runtime_s: t0.elapsed().as_secs_f64(),
    };

    let t0 = Instant::now();
    let path = dijkstra_trace(
        gradient,
        endpoint_pixel(&endpoints[0], h),
        endpoint_pixel(&endpoints[1], h),
        step_penalty,
    )?;
    let baseline = path.to_trace(gradient.width());
    let dijkstra = MethodScore {
        method: "dijkstra".into(),
        jaccard: trace_jaccard(&baseline, truth, h)?,
        runtime_s: t0.elapsed().as_secs_f64(),
    };
    Ok(Comparison {
        proposed,
        dijkstra,
        trace: result,
        dijkstra_trace: baseline,
    })
}
