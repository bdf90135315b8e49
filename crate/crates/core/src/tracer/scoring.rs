use crate::error::{Error, Result};
use crate::gp::PosteriorBatch;
use crate::image::{GradientField, Grid};

/// Composite Simpson weights for `n` equally spaced unit-step samples.
///
/// An odd number of intervals finishes with Simpson's 3/8 rule on the last
/// three; two samples fall back to the trapezoid rule.
pub(crate) fn simpson_weights(n: usize) -> Vec<f64> {
    let mut w = vec![0.0; n];
    match n {
        0 | 1 => return w,
        2 => {
            w[0] = 0.5;
            w[1] = 0.5;
            return w;
        }
        _ => {}
    }
    let intervals = n - 1;
    let simpson_end = if intervals.is_multiple_of(2) { n - 1 } else { n - 4 };
    let mut i = 0;
    while i + 2 <= simpson_end {
        w[i] += 1.0 / 3.0;
        w[i + 1] += 4.0 / 3.0;
        w[i + 2] += 1.0 / 3.0;
        i += 2;
    }
    if intervals % 2 == 1 {
        let s = n - 4;
        for (k, c) in [3.0 / 8.0, 9.0 / 8.0, 9.0 / 8.0, 3.0 / 8.0].into_iter().enumerate() {
            w[s + k] += c;
        }
    }
    w
}

/// Mean gradient response along a curve `y(x)` sampled at columns `0..n`,
/// per unit arc length: `∫ G(r(s)) ds / ∫ ds`.
///
/// Both integrals are taken over `x` with `ds = √(1 + y'(x)²) dx`; `y'` uses
/// central differences inside and one-sided differences at the ends.
pub fn score_curve(curve: &[f64], gradient: &GradientField) -> f64 {
    let n = curve.len();
    debug_assert!(n >= 3, "curves need at least three samples");
    let weights = simpson_weights(n);
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        let slope = if i == 0 {
            curve[1] - curve[0]
        } else if i == n - 1 {
            curve[n - 1] - curve[n - 2]
        } else {
            0.5 * (curve[i + 1] - curve[i - 1])
        };
        let ds = (1.0 + slope * slope).sqrt();
        num += weights[i] * gradient.bilinear(i as f64, curve[i]) * ds;
        den += weights[i] * ds;
    }
    if den > 0.0 {
        (num / den).max(0.0)
    } else {
        0.0
    }
}

/// Scores every curve of the batch in place.
pub fn score_batch(batch: &mut PosteriorBatch, gradient: &GradientField) {
    batch.scores = batch.curves().map(|c| score_curve(c, gradient)).collect();
}

/// The ⌊εL⌋ highest-scoring (lowest-cost) curves.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalCurves {
    /// Indices into the batch, by descending score then ascending index.
    pub indices: Vec<usize>,
    pub scores: Vec<f64>,
}

/// Picks the `⌊εL⌋` curves with the least cost `1/I`. Requires scored curves.
pub fn select_optimal(batch: &PosteriorBatch, keep_ratio: f64, iteration: usize) -> Result<OptimalCurves> {
    let scores = &batch.scores;
    assert_eq!(scores.len(), batch.len(), "batch must be scored before selection");
    if !scores.iter().any(|&s| s > 0.0) {
        return Err(Error::LostEdge {
            iteration,
            curves: batch.len(),
        });
    }
    let keep = ((keep_ratio * batch.len() as f64 + 1e-9).floor() as usize).clamp(1, batch.len());
    let mut order: Vec<usize> = (0..batch.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(keep);
    Ok(OptimalCurves {
        scores: order.iter().map(|&i| scores[i]).collect(),
        indices: order,
    })
}

/// `s(p) = (φ·G + φ + G) / 3`, elementwise.
pub fn score_pixels(density: &Grid, gradient: &GradientField) -> Result<Grid> {
    density.check_same_shape(gradient.grid())?;
    let data = density
        .data()
        .iter()
        .zip(gradient.grid().data())
        .map(|(&phi, &g)| (phi * g + phi + g) / 3.0)
        .collect();
    Grid::from_vec(density.height(), density.width(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(h: usize, w: usize, f: impl FnMut(usize, usize) -> f64) -> GradientField {
        GradientField::normalized(Grid::from_fn(h, w, f))
    }

    #[test]
    fn simpson_integrates_cubics_exactly() {
        for n in 3..12 {
            let w = simpson_weights(n);
            let b = (n - 1) as f64;
            let integral: f64 = w.iter().enumerate().map(|(i, wi)| wi * (i as f64).powi(3)).sum();
            assert!((integral - b.powi(4) / 4.0).abs() < 1e-9, "n = {n}");
            let length: f64 = w.iter().sum();
            assert!((length - b).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_curve_on_unit_gradient_scores_one() {
        let g = field(10, 50, |_, _| 1.0);
        assert!((score_curve(&vec![4.0; 50], &g) - 1.0).abs() < 1e-12);
        let wavy: Vec<f64> = (0..50).map(|x| 4.0 + 3.0 * (x as f64 / 5.0).sin()).collect();
        assert!((score_curve(&wavy, &g) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn curve_outside_image_scores_zero() {
        let g = field(10, 50, |_, _| 1.0);
        assert_eq!(score_curve(&vec![-3.0; 50], &g), 0.0);
        assert_eq!(score_curve(&vec![25.0; 50], &g), 0.0);
    }

    #[test]
    fn half_lit_line_scores_one_half() {
        // analytic line integral: G = 1 on columns [0, 50), 0 on [50, 100);
        // bilinear ramps between 49 and 50 so the exact value is 49.5 / 99.
        let g = field(20, 100, |_, c| if c < 50 { 1.0 } else { 0.0 });
        let line: Vec<f64> = (0..100).map(|x| 2.0 + 0.1 * x as f64).collect();
        let s = score_curve(&line, &g);
        assert!((s - 0.5).abs() < 1e-2, "{s}");
        assert!((s - 49.5 / 99.0).abs() < 1e-2);
    }

    fn scored(scores: Vec<f64>) -> PosteriorBatch {
        let mut b = PosteriorBatch::from_curves(vec![vec![0.0; 3]; scores.len()]);
        b.scores = scores;
        b
    }

    #[test]
    fn selection_rules() {
        let b = scored(vec![1.0, 2.0, 3.0, 4.0]);
        let all = select_optimal(&b, 1.0, 1).unwrap();
        assert_eq!(all.indices, vec![3, 2, 1, 0]);
        let half = select_optimal(&b, 0.5, 1).unwrap();
        assert_eq!(half.scores, vec![4.0, 3.0]);
        let ties = select_optimal(&scored(vec![0.5; 6]), 0.5, 1).unwrap();
        assert_eq!(ties.indices, vec![0, 1, 2]);
        match select_optimal(&scored(vec![0.0; 4]), 0.5, 7) {
            Err(Error::LostEdge { iteration: 7, curves: 4 }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pixel_score_formula() {
        let g = field(1, 3, |_, c| [1.0, 0.6, 0.0][c]);
        let phi = Grid::from_vec(1, 3, vec![1.0, 0.0, 1.0]).unwrap();
        let s = score_pixels(&phi, &g).unwrap();
        assert!((s.get(0, 0) - 1.0).abs() < 1e-15);
        assert!((s.get(0, 1) - 0.2).abs() < 1e-15);
        assert!((s.get(0, 2) - 1.0 / 3.0).abs() < 1e-15);
        assert!(score_pixels(&Grid::zeros(2, 3), &g).is_err());
    }
}
