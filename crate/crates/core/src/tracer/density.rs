//! Weighted frequency density of where the optimal curves pass.

use crate::image::Grid;

/// Kernel support radius in units of the density lengthscale.
pub const SUPPORT_RADIUS: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyDensity {
    /// Density rescaled so its maximum is 1 (or identically 0).
    pub grid: Grid,
    /// Total deposited mass before rescaling.
    pub raw_mass: f64,
    /// Sum of the per-point weights; 1 up to rounding.
    pub weight_sum: f64,
}

/// A weighted point `(x = column, y = row, weight)`.
pub type WeightedPoint = (f64, f64, f64);

/// Deposits an isotropic 2D Gaussian `w·(2πℓ²)⁻¹ exp(−|z − p|² / 2ℓ²)` for every
/// point onto the pixel grid, truncated at radius `4ℓ`.
pub fn deposit(points: &[WeightedPoint], height: usize, width: usize, lengthscale: f64) -> Grid {
    let mut grid = Grid::zeros(height, width);
    let radius = SUPPORT_RADIUS * lengthscale;
    let norm = 1.0 / (std::f64::consts::TAU * lengthscale * lengthscale);
    let inv2l2 = 0.5 / (lengthscale * lengthscale);
    let (w_max, h_max) = (width as f64 - 1.0, height as f64 - 1.0);
    let mut row_factors = Vec::new();
    for &(x, y, wt) in points {
        if wt == 0.0 || !x.is_finite() || !y.is_finite() {
            continue;
        }
        let c0 = (x - radius).ceil().max(0.0);
        let c1 = (x + radius).floor().min(w_max);
        let r0 = (y - radius).ceil().max(0.0);
        let r1 = (y + radius).floor().min(h_max);
        if c0 > c1 || r0 > r1 {
            continue;
        }
        let (c0, c1, r0, r1) = (c0 as usize, c1 as usize, r0 as usize, r1 as usize);
        row_factors.clear();
        row_factors.extend((r0..=r1).map(|r| {
            let dy = r as f64 - y;
            (dy * dy, (-dy * dy * inv2l2).exp())
        }));
        for c in c0..=c1 {
            let dx = c as f64 - x;
            let dx2 = dx * dx;
            let fx = wt * norm * (-dx2 * inv2l2).exp();
            for (k, &(dy2, fy)) in row_factors.iter().enumerate() {
                if dx2 + dy2 <= radius * radius {
                    grid.add(r0 + k, c, fx * fy);
                }
            }
        }
    }
    grid
}

/// Builds the frequency density from the optimal curves and their gradient scores.
///
/// Every point of curve `l` carries weight `I_l / Σ_{l,i} I_l`, so all weights sum to 1.
pub fn build_density(curves: &[&[f64]], scores: &[f64], height: usize, width: usize, lengthscale: f64) -> FrequencyDensity {
    assert_eq!(curves.len(), scores.len());
    let total: f64 = curves.iter().zip(scores).map(|(c, &s)| s * c.len() as f64).sum();
    let mut points = Vec::with_capacity(curves.iter().map(|c| c.len()).sum());
    let mut weight_sum = 0.0;
    for (curve, &s) in curves.iter().zip(scores) {
        let w = if total > 0.0 { s / total } else { 0.0 };
        for (x, &y) in curve.iter().enumerate() {
            points.push((x as f64, y, w));
            weight_sum += w;
        }
    }
    let mut grid = deposit(&points, height, width, lengthscale);
    let raw_mass: f64 = grid.data().iter().sum();
    let max = grid.max();
    if max > 0.0 {
        grid.data_mut().iter_mut().for_each(|v| *v /= max);
    }
    FrequencyDensity {
        grid,
        raw_mass,
        weight_sum,
    }
}
