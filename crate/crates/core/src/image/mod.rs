//! Images, gradient fields, polar resampling and synthetic test cases.

mod gradient;
mod grid;
mod io;
mod polar;
mod synthetic;

pub use gradient::{gaussian_blur, gradient_magnitude, sobel_magnitude};
pub use grid::{GradientField, Grid};
pub use io::{load_grayscale, save_grayscale, to_gray8};
pub use polar::{to_polar, trace_from_polar, PolarGeometry, PolarImage};
pub use synthetic::{make_sinusoid_case, SinusoidParams, SyntheticCase, LOWER_INTENSITY, UPPER_INTENSITY};

/// Bilinear sample of a gradient field at `(x = column, y = row)`; 0 outside the image.
pub fn bilinear(g: &GradientField, x: f64, y: f64) -> f64 {
    g.bilinear(x, y)
}
