use serde::{Deserialize, Serialize};

use super::{trace, EdgePoint, TraceConfig, TraceResult};
use crate::error::{Error, Result};
use crate::image::GradientField;

/// How a frame's observations seed the next frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Propagation {
    /// Every frame starts from the original endpoints.
    Endpoints,
    /// Every k-th observation of the previous result (the last one is always kept).
    Stride(usize),
}

impl Propagation {
    fn seed_points(&self, previous: &TraceResult, endpoints: &[EdgePoint]) -> Vec<EdgePoint> {
        match *self {
            Propagation::Endpoints => endpoints.to_vec(),
            Propagation::Stride(k) => {
                let obs = &previous.observations;
                let mut pts: Vec<EdgePoint> = obs
                    .iter()
                    .step_by(k.max(1))
                    .map(|p| EdgePoint::new(p.col, p.row))
                    .collect();
                if let Some(last) = obs.last() {
                    if pts.last().map(|p| p.col) != Some(last.col) {
                        pts.push(EdgePoint::new(last.col, last.row));
                    }
                }
                pts
            }
        }
    }
}

/// Traces the same edge through consecutive frames.
///
/// A failed frame yields its error in place; the next frame is seeded from
/// the most recent success (or the endpoints if there is none).
pub fn trace_sequence(
    config: &TraceConfig,
    frames: &[GradientField],
    endpoints: &[EdgePoint],
    propagation: Propagation,
) -> Vec<Result<TraceResult>> {
    let Some(first) = frames.first() else {
        return Vec::new();
    };
    let shape = (first.height(), first.width());
    let mut out = Vec::with_capacity(frames.len());
    let mut last_success: Option<TraceResult> = None;
    for frame in frames {
        if (frame.height(), frame.width()) != shape {
            out.push(Err(Error::Shape {
                expected: shape,
                found: (frame.height(), frame.width()),
            }));
            continue;
        }
        let init = match &last_success {
            Some(prev) => propagation.seed_points(prev, endpoints),
            None => endpoints.to_vec(),
        };
        let res = trace(config, frame, &init);
        if let Ok(r) = &res {
            last_success = Some(r.clone());
        }
        out.push(res);
    }
    out
}
