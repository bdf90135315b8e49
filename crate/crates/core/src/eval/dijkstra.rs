//! Minimum-cost 8-connected pixel paths.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{GradientField, Grid};

/// Cost offset δ added to `1 − G` so every step costs something.
pub const DEFAULT_STEP_PENALTY: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pixel {
    pub row: usize,
    pub col: usize,
}

impl Pixel {
    pub fn new(row: usize, col: usize) -> Self {
        Pixel { row, col }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PixelPath {
    /// Start to end inclusive.
    pub pixels: Vec<Pixel>,
    /// Sum of the costs of every pixel entered after the start.
    pub cost: f64,
}

impl PixelPath {
    /// One row per column by first visit; columns the path never reaches
    /// take the nearest visited row.
    pub fn to_trace(&self, width: usize) -> Vec<f64> {
        let mut out: Vec<Option<f64>> = vec![None; width];
        for p in &self.pixels {
            if p.col < width && out[p.col].is_none() {
                out[p.col] = Some(p.row as f64);
            }
        }
        let mut last = out.iter().flatten().next().copied().unwrap_or(0.0);
        out.into_iter()
            .map(|v| {
                if let Some(v) = v {
                    last = v;
                }
                last
            })
            .collect()
    }
}

#[derive(PartialEq)]
struct State {
    cost: f64,
    index: usize,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        other.cost.total_cmp(&self.cost).then(other.index.cmp(&self.index))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn check_pixel(p: Pixel, h: usize, w: usize) -> Result<()> {
    if p.row >= h || p.col >= w {
        return Err(Error::config(format!(
            "pixel (row {}, col {}) is outside the {h}x{w} image",
            p.row, p.col
        )));
    }
    Ok(())
}

/// Dijkstra over an 8-connected grid where entering pixel `p` costs `cost[p]`.
pub fn shortest_path(cost: &Grid, start: Pixel, end: Pixel) -> Result<PixelPath> {
    let (h, w) = cost.shape();
    check_pixel(start, h, w)?;
    check_pixel(end, h, w)?;
    if let Some(v) = cost.data().iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::config(format!("pixel costs must be finite and non-negative, found {v}")));
    }
    let idx = |p: Pixel| p.row * w + p.col;
    let mut dist = vec![f64::INFINITY; h * w];
    let mut prev = vec![usize::MAX; h * w];
    let mut heap = BinaryHeap::new();
    dist[idx(start)] = 0.0;
    heap.push(State {
        cost: 0.0,
        index: idx(start),
    });
    let target = idx(end);
    while let Some(State { cost: d, index }) = heap.pop() {
        if d > dist[index] {
            continue;
        }
        if index == target {
            break;
        }
        let (r, c) = (index / w, index % w);
        for dr in -1i64..=1 {
            for dc in -1i64..=1 {
                if dr == 0 && dc == 0 {
                    continue;
                }
                let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                if nr < 0 || nc < 0 || nr >= h as i64 || nc >= w as i64 {
                    continue;
                }
                let n = nr as usize * w + nc as usize;
                let nd = d + cost.data()[n];
                if nd < dist[n] {
                    dist[n] = nd;
                    prev[n] = index;
                    heap.push(State { cost: nd, index: n });
                }
            }
        }
    }
    let mut pixels = vec![end];
    let mut at = target;
    while at != idx(start) {
        at = prev[at];
        pixels.push(Pixel::new(at / w, at % w));
    }
    pixels.reverse();
    Ok(PixelPath {
        pixels,
        cost: dist[target],
    })
}

/// Greedy baseline: the path of maximal gradient response, with per-pixel
/// cost `1 − G + δ`.
pub fn dijkstra_trace(gradient: &GradientField, start: Pixel, end: Pixel, step_penalty: f64) -> Result<PixelPath> {
    if !(step_penalty.is_finite() && step_penalty >= 0.0) {
        return Err(Error::config(format!("step penalty must be non-negative, got {step_penalty}")));
    }
    let cost = gradient.grid().map(|g| 1.0 - g + step_penalty);
    shortest_path(&cost, start, end)
}
