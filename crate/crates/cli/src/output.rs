//! CSV files, JSON reports and overlay images.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use gpet_core::image::{to_gray8, Grid};
use image::{DynamicImage, Rgb, RgbImage};
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const MEAN_COLOUR: [u8; 3] = [230, 30, 30];
pub const BAND_COLOUR: [u8; 3] = [40, 160, 255];
pub const BASELINE_COLOUR: [u8; 3] = [250, 200, 0];

pub fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn csv_writer(path: &Path) -> CliResult<csv::Writer<File>> {
    csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))
}

fn write_rows<R: Serialize>(path: &Path, rows: impl IntoIterator<Item = R>) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    for r in rows {
        w.serialize(r).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[derive(Serialize)]
struct TraceRow {
    column: usize,
    mean: f64,
    lower: f64,
    upper: f64,
}

pub fn write_trace_csv(path: &Path, mean: &[f64], lower: &[f64], upper: &[f64]) -> CliResult<()> {
    write_rows(
        path,
        (0..mean.len()).map(|c| TraceRow {
            column: c,
            mean: mean[c],
            lower: lower[c],
            upper: upper[c],
        }),
    )
}

#[derive(Serialize)]
struct PointRow {
    column: usize,
    row: f64,
}

pub fn write_points_csv(path: &Path, points: impl IntoIterator<Item = (usize, f64)>) -> CliResult<()> {
    write_rows(path, points.into_iter().map(|(column, row)| PointRow { column, row }))
}

#[derive(Serialize)]
struct ContourRow {
    column: usize,
    x: f64,
    y: f64,
}

pub fn write_contour_csv(path: &Path, contour: &[(f64, f64)]) -> CliResult<()> {
    write_rows(
        path,
        contour.iter().enumerate().map(|(column, &(x, y))| ContourRow { column, x, y }),
    )
}

/// Reads `(column, row)` pairs from a CSV with a `column` header and a `row`
/// or `mean` header, so trace files and point files both work.
pub fn read_points_csv(path: &Path) -> CliResult<Vec<(usize, f64)>> {
    let bad = |m: String| CliError::config(format!("{}: {m}", path.display()));
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::io(path, e))?;
    let headers = rdr.headers().map_err(|e| CliError::io(path, e))?.clone();
    let find = |name: &str| headers.iter().position(|h| h.trim() == name);
    let col_idx = find("column").ok_or_else(|| bad("missing a `column` header".into()))?;
    let row_idx = find("row")
        .or_else(|| find("mean"))
        .ok_or_else(|| bad("missing a `row` or `mean` header".into()))?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::io(path, e))?;
        let field = |k: usize| rec.get(k).unwrap_or("").trim().to_string();
        let col: usize = field(col_idx)
            .parse()
            .map_err(|_| bad(format!("line {}: bad column {:?}", i + 2, field(col_idx))))?;
        let row: f64 = field(row_idx)
            .parse()
            .map_err(|_| bad(format!("line {}: bad row {:?}", i + 2, field(row_idx))))?;
        if !row.is_finite() {
            return Err(bad(format!("line {}: row is not finite", i + 2)));
        }
        out.push((col, row));
    }
    Ok(out)
}

pub fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path, e))?;
    let mut f = File::create(path).map_err(|e| CliError::io(path, e))?;
    writeln!(f, "{text}").map_err(|e| CliError::io(path, e))
}

/// An RGB copy of a grayscale image for drawing on.
pub struct Overlay(RgbImage);

impl Overlay {
    pub fn new(base: &Grid) -> Self {
        Overlay(DynamicImage::ImageLuma8(to_gray8(base)).to_rgb8())
    }

    fn put(&mut self, x: f64, y: f64, colour: [u8; 3]) {
        let (x, y) = (x.round(), y.round());
        if x >= 0.0 && y >= 0.0 && x < self.0.width() as f64 && y < self.0.height() as f64 {
            self.0.put_pixel(x as u32, y as u32, Rgb(colour));
        }
    }

    /// Draws a 1 px polyline through `(column, row)` points.
    pub fn polyline(&mut self, points: &[(f64, f64)], closed: bool, colour: [u8; 3]) {
        let mut segments: Vec<_> = points.windows(2).map(|w| (w[0], w[1])).collect();
        if closed && points.len() > 2 {
            segments.push((points[points.len() - 1], points[0]));
        }
        if let [p] = points {
            self.put(p.0, p.1, colour);
        }
        for ((x0, y0), (x1, y1)) in segments {
            let n = (x1 - x0).abs().max((y1 - y0).abs()).ceil().max(1.0) as usize;
            for k in 0..=n {
                let t = k as f64 / n as f64;
                self.put(x0 + t * (x1 - x0), y0 + t * (y1 - y0), colour);
            }
        }
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        self.0
            .save_with_format(path, image::ImageFormat::Png)
            .map_err(|e| CliError::io(path, e))
    }
}

/// `(column, row)` points of an open trace.
pub fn open_curve(rows: &[f64]) -> Vec<(f64, f64)> {
    rows.iter().enumerate().map(|(c, &r)| (c as f64, r)).collect()
}
