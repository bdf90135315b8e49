//! Threshold, bin and non-max suppress candidate edge pixels.

use serde::{Deserialize, Serialize};

use crate::image::{GradientField, Grid};

/// An observed edge pixel. `noise` pins a per-point noise variance; `None`
/// uses the shared σ_y².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgePoint {
    pub col: usize,
    pub row: f64,
    pub noise: Option<f64>,
}

impl EdgePoint {
    pub fn new(col: usize, row: f64) -> Self {
        EdgePoint { col, row, noise: None }
    }

    pub fn pinned(col: usize, row: f64, noise: f64) -> Self {
        EdgePoint {
            col,
            row,
            noise: Some(noise),
        }
    }
}

/// Sub-interval index of a column: `[(i−1)Δx, iΔx)`.
pub fn bin_of(col: usize, bin_width: usize, bins: usize) -> usize {
    (col / bin_width).min(bins.saturating_sub(1))
}

#[derive(Clone, Copy)]
struct Candidate {
    point: EdgePoint,
    score: f64,
    gradient: f64,
}

impl Candidate {
    /// Higher score, then lower column, then higher gradient, then lower row.
    fn beats(&self, other: &Candidate) -> bool {
        self.score
            .total_cmp(&other.score)
            .then(other.point.col.cmp(&self.point.col))
            .then(self.gradient.total_cmp(&other.gradient))
            .then(other.point.row.total_cmp(&self.point.row))
            .is_gt()
    }
}

/// Forms the next observation set from pixel scores.
///
/// Pixels with `s ≥ T` compete with the previous observations (re-scored
/// under the current scores, and also required to reach `T`) for one slot per
/// sub-interval; the highest score wins. A previous observation holds its slot
/// on exact ties. The first and last sub-intervals keep their previous
/// observation if nothing else qualifies there.
pub fn accept_discard(
    scores: &Grid,
    threshold: f64,
    bin_width: usize,
    previous: &[EdgePoint],
    gradient: &GradientField,
) -> Vec<EdgePoint> {
    let (h, w) = scores.shape();
    let bins = w.div_ceil(bin_width.max(1));
    let mut best: Vec<Option<Candidate>> = vec![None; bins];

    // strict comparison: the incumbent keeps its slot on exact ties
    let offer = |slot: &mut Option<Candidate>, cand: Candidate| {
        if slot.as_ref().is_none_or(|cur| cand.beats(cur)) {
            *slot = Some(cand);
        }
    };

    for p in previous {
        let s = scores.bilinear(p.col as f64, p.row);
        if s >= threshold {
            let cand = Candidate {
                point: *p,
                score: s,
                gradient: gradient.bilinear(p.col as f64, p.row),
            };
            offer(&mut best[bin_of(p.col, bin_width, bins)], cand);
        }
    }
    for c in 0..w {
        let slot = &mut best[bin_of(c, bin_width, bins)];
        for r in 0..h {
            let s = scores.get(r, c);
            if s < threshold {
                continue;
            }
            let cand = Candidate {
                point: EdgePoint::new(c, r as f64),
                score: s,
                gradient: gradient.get(r, c),
            };
            offer(slot, cand);
        }
    }

    for edge_bin in [0, bins.saturating_sub(1)] {
        if best[edge_bin].is_none() {
            if let Some(p) = previous.iter().find(|p| bin_of(p.col, bin_width, bins) == edge_bin) {
                best[edge_bin] = Some(Candidate {
                    point: *p,
                    score: 0.0,
                    gradient: 0.0,
                });
            }
        }
    }
    best.into_iter().flatten().map(|c| c.point).collect()
}
