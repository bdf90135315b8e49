use crate::error::{Error, Result};

/// Dense row-major `height x width` grid of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl Grid {
    pub fn zeros(height: usize, width: usize) -> Self {
        Grid {
            height,
            width,
            data: vec![0.0; height * width],
        }
    }

    pub fn from_vec(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != height * width {
            return Err(Error::Shape {
                expected: (height, width),
                found: (data.len() / width.max(1), width),
            });
        }
        Ok(Grid { height, width, data })
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Grid { height, width, data }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.data[row * self.width + col] = v;
    }

    #[inline]
    pub fn add(&mut self, row: usize, col: usize, v: f64) {
        self.data[row * self.width + col] += v;
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Grid {
        Grid {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Bilinear interpolation at real `(x = column, y = row)`; zero outside
    /// `[0, width-1] x [0, height-1]`.
    pub fn bilinear(&self, x: f64, y: f64) -> f64 {
        let (w, h) = (self.width, self.height);
        if w == 0 || h == 0 || !(x >= 0.0 && y >= 0.0) || x > (w - 1) as f64 || y > (h - 1) as f64 {
            return 0.0;
        }
        let c0 = (x.floor() as usize).min(w - 1);
        let r0 = (y.floor() as usize).min(h - 1);
        let c1 = (c0 + 1).min(w - 1);
        let r1 = (r0 + 1).min(h - 1);
        let fx = x - c0 as f64;
        let fy = y - r0 as f64;
        let top = self.get(r0, c0) * (1.0 - fx) + self.get(r0, c1) * fx;
        let bottom = self.get(r1, c0) * (1.0 - fx) + self.get(r1, c1) * fx;
        top * (1.0 - fy) + bottom * fy
    }

    pub(crate) fn check_same_shape(&self, other: &Grid) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::Shape {
                expected: self.shape(),
                found: other.shape(),
            });
        }
        Ok(())
    }
}

/// Image gradient response normalised to `[0, 1]` with maximum 1 (or identically 0).
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField(Grid);

impl GradientField {
    /// Clamps negatives to zero and rescales by the maximum.
    pub fn normalized(grid: Grid) -> Self {
        let mut grid = grid.map(|v| if v.is_finite() { v.max(0.0) } else { 0.0 });
        let max = grid.max();
        if max > 0.0 {
            grid.data_mut().iter_mut().for_each(|v| *v /= max);
        }
        GradientField(grid)
    }

    pub fn grid(&self) -> &Grid {
        &self.0
    }

    pub fn into_grid(self) -> Grid {
        self.0
    }

    pub fn height(&self) -> usize {
        self.0.height
    }

    pub fn width(&self) -> usize {
        self.0.width
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0.get(row, col)
    }

    pub fn bilinear(&self, x: f64, y: f64) -> f64 {
        self.0.bilinear(x, y)
    }

    /// Zeroes every row of the given inclusive column spans, then renormalises.
    pub fn occlude_columns(&self, spans: &[(usize, usize)]) -> Self {
        let mut g = self.0.clone();
        for &(a, b) in spans {
            for c in a..=b.min(g.width.saturating_sub(1)) {
                for r in 0..g.height {
                    g.set(r, c, 0.0);
                }
            }
        }
        GradientField::normalized(g)
    }
}
