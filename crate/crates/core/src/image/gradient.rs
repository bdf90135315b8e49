use super::grid::{GradientField, Grid};

/// Separable Gaussian blur with replicated borders.
pub fn gaussian_blur(image: &Grid, sigma: f64) -> Grid {
    if sigma <= 0.0 || image.is_empty() {
        return image.clone();
    }
    let radius = (3.0 * sigma).ceil() as isize;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|i| (-0.5 * (i as f64 / sigma).powi(2)).exp())
        .collect();
    let total: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= total);

    let (h, w) = image.shape();
    let clamp = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;
    let horizontal = Grid::from_fn(h, w, |r, c| {
        kernel
            .iter()
            .enumerate()
            .map(|(k, wt)| wt * image.get(r, clamp(c as isize + k as isize - radius, w)))
            .sum()
    });
    Grid::from_fn(h, w, |r, c| {
        kernel
            .iter()
            .enumerate()
            .map(|(k, wt)| wt * horizontal.get(clamp(r as isize + k as isize - radius, h), c))
            .sum()
    })
}

/// Unnormalised Sobel gradient magnitude with replicated borders.
pub fn sobel_magnitude(image: &Grid) -> Grid {
    let (h, w) = image.shape();
    let at = |r: isize, c: isize| {
        image.get(
            r.clamp(0, h as isize - 1) as usize,
            c.clamp(0, w as isize - 1) as usize,
        )
    };
    Grid::from_fn(h, w, |r, c| {
        let (r, c) = (r as isize, c as isize);
        let gx = (at(r - 1, c + 1) + 2.0 * at(r, c + 1) + at(r + 1, c + 1))
            - (at(r - 1, c - 1) + 2.0 * at(r, c - 1) + at(r + 1, c - 1));
        let gy = (at(r + 1, c - 1) + 2.0 * at(r + 1, c) + at(r + 1, c + 1))
            - (at(r - 1, c - 1) + 2.0 * at(r - 1, c) + at(r - 1, c + 1));
        (gx * gx + gy * gy).sqrt() / 8.0
    })
}

/// Default edge response: Gaussian smoothing (σ = 1 px), Sobel magnitude, rescaled to max 1.
pub fn gradient_magnitude(image: &Grid) -> GradientField {
    GradientField::normalized(sobel_magnitude(&gaussian_blur(image, 1.0)))
}
