//! Polar resampling so that closed, star-shaped edges become functions of angle.
//!
//! Polar images are indexed `(row = radius, column = angle)`: column `j` is the
//! ray at angle `2πj / angular_samples` and row `i` is radius
//! `i · max_radius / (radial_samples - 1)`.

use std::f64::consts::TAU;

use super::grid::Grid;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarGeometry {
    /// Centre as `(column, row)`.
    pub center: (f64, f64),
    pub max_radius: f64,
    pub radial_samples: usize,
    pub angular_samples: usize,
}

impl PolarGeometry {
    /// Geometry whose largest radius reaches the farthest image corner.
    pub fn new(height: usize, width: usize, center: (f64, f64), radial_samples: usize, angular_samples: usize) -> Result<Self> {
        let (cx, cy) = center;
        let (w, h) = ((width as f64) - 1.0, (height as f64) - 1.0);
        if !(0.0..=w).contains(&cx) || !(0.0..=h).contains(&cy) {
            return Err(Error::config(format!(
                "polar centre ({cx}, {cy}) lies outside the {width}x{height} image"
            )));
        }
        if radial_samples < 2 || angular_samples < 2 {
            return Err(Error::config("polar sample counts must be at least 2"));
        }
        let max_radius = [(0.0, 0.0), (w, 0.0), (0.0, h), (w, h)]
            .iter()
            .map(|&(x, y)| ((x - cx).powi(2) + (y - cy).powi(2)).sqrt())
            .fold(0.0, f64::max);
        Ok(PolarGeometry {
            center,
            max_radius,
            radial_samples,
            angular_samples,
        })
    }

    pub fn radius_step(&self) -> f64 {
        self.max_radius / (self.radial_samples - 1) as f64
    }

    pub fn angle(&self, column: f64) -> f64 {
        TAU * column / self.angular_samples as f64
    }

    /// Cartesian `(column, row)` of a polar sample at real `(radius row, angle column)`.
    pub fn to_cartesian(&self, radius_row: f64, angle_column: f64) -> (f64, f64) {
        let r = radius_row * self.radius_step();
        let t = self.angle(angle_column);
        (self.center.0 + r * t.cos(), self.center.1 + r * t.sin())
    }

    /// Real `(radius row, angle column)` of a Cartesian point, angle in `[0, angular_samples)`.
    pub fn to_polar(&self, x: f64, y: f64) -> (f64, f64) {
        let (dx, dy) = (x - self.center.0, y - self.center.1);
        let r = (dx * dx + dy * dy).sqrt() / self.radius_step();
        let t = dy.atan2(dx).rem_euclid(TAU);
        (r, t / TAU * self.angular_samples as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarImage {
    pub grid: Grid,
    pub geometry: PolarGeometry,
}

/// Resamples `image` about `center = (column, row)` by bilinear interpolation.
pub fn to_polar(image: &Grid, center: (f64, f64), radial_samples: usize, angular_samples: usize) -> Result<PolarImage> {
    let geometry = PolarGeometry::new(image.height(), image.width(), center, radial_samples, angular_samples)?;
    let grid = Grid::from_fn(radial_samples, angular_samples, |i, j| {
        let (x, y) = geometry.to_cartesian(i as f64, j as f64);
        image.bilinear(x, y)
    });
    Ok(PolarImage { grid, geometry })
}

/// Maps a radius-per-angle trace (in polar rows) back to a closed Cartesian
/// polyline of `(column, row)` points, one per angle column.
pub fn trace_from_polar(trace: &[f64], geometry: &PolarGeometry) -> Vec<(f64, f64)> {
    trace
        .iter()
        .enumerate()
        .map(|(j, &r)| geometry.to_cartesian(r, j as f64))
        .collect()
}
