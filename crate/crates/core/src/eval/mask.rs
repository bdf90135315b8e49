use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which side of an open trace is filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Rows at or below the trace (larger row index).
    Below,
    Above,
}

/// Boolean region over an image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionMask {
    height: usize,
    width: usize,
    data: Vec<bool>,
}

impl RegionMask {
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        RegionMask { height, width, data }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.data[row * self.width + col]
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }
}

/// Marks `r ≥ trace(c)` (below) or `r ≤ trace(c)` (above), with the trace
/// clamped to the image rows.
pub fn rasterize(trace: &[f64], height: usize, width: usize, side: Side) -> Result<RegionMask> {
    if trace.len() != width {
        return Err(Error::Shape {
            expected: (1, width),
            found: (1, trace.len()),
        });
    }
    if let Some(c) = trace.iter().position(|t| !t.is_finite()) {
        return Err(Error::config(format!("trace is not finite at column {c}")));
    }
    let top = height.saturating_sub(1) as f64;
    Ok(RegionMask::from_fn(height, width, |r, c| {
        let t = trace[c].clamp(0.0, top);
        match side {
            Side::Below => r as f64 >= t,
            Side::Above => r as f64 <= t,
        }
    }))
}

/// Marks pixel centres enclosed by a closed polygon of `(x, y)` vertices
/// (even-odd rule).
pub fn rasterize_closed(polygon: &[(f64, f64)], height: usize, width: usize) -> RegionMask {
    let n = polygon.len();
    let mut mask = RegionMask::from_fn(height, width, |_, _| false);
    if n < 3 {
        return mask;
    }
    let mut crossings = Vec::new();
    for r in 0..height {
        let y = r as f64;
        crossings.clear();
        for i in 0..n {
            let (x0, y0) = polygon[i];
            let (x1, y1) = polygon[(i + 1) % n];
            if (y0 <= y) != (y1 <= y) {
                crossings.push(x0 + (y - y0) / (y1 - y0) * (x1 - x0));
            }
        }
        crossings.sort_by(f64::total_cmp);
        for pair in crossings.chunks_exact(2) {
            let c0 = pair[0].ceil().max(0.0);
            let c1 = pair[1].floor().min(width as f64 - 1.0);
            if c0 > c1 {
                continue;
            }
            for c in c0 as usize..=c1 as usize {
                mask.data[r * width + c] = true;
            }
        }
    }
    mask
}

/// Intersection over union; 1 when both masks are empty.
pub fn jaccard(a: &RegionMask, b: &RegionMask) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::Shape {
            expected: a.shape(),
            found: b.shape(),
        });
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.data.iter().zip(&b.data) {
        inter += (x && y) as usize;
        union += (x || y) as usize;
    }
    Ok(if union == 0 { 1.0 } else { inter as f64 / union as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn flat_trace_counts() {
        let below = rasterize(&[5.0; 8], 10, 8, Side::Below).unwrap();
        assert_eq!(below.count(), 5 * 8);
        let below_odd = rasterize(&[5.5; 8], 11, 8, Side::Below).unwrap();
        assert_eq!(below_odd.count(), 5 * 8);
        let above = rasterize(&[0.0; 8], 10, 8, Side::Above).unwrap();
        assert_eq!(above.count(), 8);
        assert!(rasterize(&[1.0; 3], 4, 4, Side::Below).is_err());
        assert!(rasterize(&[1.0, f64::NAN], 4, 2, Side::Below).is_err());
    }

    #[test]
    fn jaccard_examples() {
        let a = RegionMask::from_fn(4, 8, |_, c| c < 4);
        let b = RegionMask::from_fn(4, 8, |_, c| (2..6).contains(&c));
        let d = RegionMask::from_fn(4, 8, |_, c| c >= 4);
        assert_eq!(jaccard(&a, &a).unwrap(), 1.0);
        assert_eq!(jaccard(&a, &d).unwrap(), 0.0);
        assert!((jaccard(&a, &b).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let empty = RegionMask::from_fn(4, 8, |_, _| false);
        assert_eq!(jaccard(&empty, &empty).unwrap(), 1.0);
        assert!(jaccard(&a, &RegionMask::from_fn(4, 7, |_, _| true)).is_err());
    }

    #[test]
    fn closed_square() {
        let sq = [(2.0, 2.0), (6.0, 2.0), (6.0, 6.0), (2.0, 6.0)];
        let m = rasterize_closed(&sq, 10, 10);
        // rows 2..6 (half-open in y), columns 2..=6
        assert_eq!(m.count(), 4 * 5);
        assert!(m.get(4, 4));
        assert!(!m.get(8, 4));
    }

    proptest! {
        #[test]
        fn below_and_above_partition(trace in proptest::collection::vec(-3.0f64..15.0, 6)) {
            let (h, w) = (12, 6);
            let b = rasterize(&trace, h, w, Side::Below).unwrap();
            let a = rasterize(&trace, h, w, Side::Above).unwrap();
            for r in 0..h {
                for c in 0..w {
                    prop_assert!(b.get(r, c) || a.get(r, c));
                    let on_line = r as f64 == trace[c].clamp(0.0, (h - 1) as f64);
                    prop_assert_eq!(b.get(r, c) && a.get(r, c), on_line);
                }
            }
        }

        #[test]
        fn jaccard_symmetric_and_one_iff_equal(
            x in proptest::collection::vec(any::<bool>(), 20),
            y in proptest::collection::vec(any::<bool>(), 20),
        ) {
            let a = RegionMask::from_fn(4, 5, |r, c| x[r * 5 + c]);
            let b = RegionMask::from_fn(4, 5, |r, c| y[r * 5 + c]);
            let j = jaccard(&a, &b).unwrap();
            prop_assert_eq!(j, jaccard(&b, &a).unwrap());
            prop_assert!((0.0..=1.0).contains(&j));
            prop_assert_eq!(j == 1.0, a == b);
        }
    }
}
