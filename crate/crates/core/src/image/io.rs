//! 8-bit grayscale PGM (P2/P5) and PNG reading and writing.

use std::path::Path;

use image::{GrayImage, ImageFormat, Luma};

use super::grid::Grid;
use crate::error::{Error, Result};

fn format_error(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Loads an image as a row-major grid with intensities in `[0, 1]`.
pub fn load_grayscale(path: impl AsRef<Path>) -> Result<Grid> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let format = image::guess_format(&bytes).map_err(|e| format_error(path, e))?;
    if !matches!(format, ImageFormat::Png | ImageFormat::Pnm) {
        return Err(format_error(path, format!("unsupported image format {format:?}")));
    }
    let img = image::load_from_memory_with_format(&bytes, format).map_err(|e| format_error(path, e))?;
    let gray = img.to_luma16();
    let (w, h) = gray.dimensions();
    let data = gray.pixels().map(|p| p.0[0] as f64 / u16::MAX as f64).collect();
    Grid::from_vec(h as usize, w as usize, data)
}

/// Writes a grid (clamped to `[0, 1]`) as 8-bit grayscale. The format follows the
/// extension: `.png` writes PNG, anything else binary PGM.
pub fn save_grayscale(path: impl AsRef<Path>, grid: &Grid) -> Result<()> {
    let path = path.as_ref();
    let img = to_gray8(grid);
    let format = match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("png") => ImageFormat::Png,
        _ => ImageFormat::Pnm,
    };
    img.save_with_format(path, format).map_err(|e| match e {
        image::ImageError::IoError(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => format_error(path, other),
    })
}

/// 8-bit copy of a grid, clamped to `[0, 1]`.
pub fn to_gray8(grid: &Grid) -> GrayImage {
    GrayImage::from_fn(grid.width() as u32, grid.height() as u32, |x, y| {
        let v = grid.get(y as usize, x as usize).clamp(0.0, 1.0);
        Luma([(v * 255.0).round() as u8])
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_binary_pgm() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.pgm");
        let mut bytes = b"P5\n2 2\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 255, 255, 0]);
        std::fs::write(&p, bytes).unwrap();
        let g = load_grayscale(&p).unwrap();
        assert_eq!(g.shape(), (2, 2));
        assert_eq!(g.data(), &[0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn reads_ascii_pgm() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.pgm");
        std::fs::write(&p, "P2\n# comment\n3 1\n255\n0 51 255\n").unwrap();
        let g = load_grayscale(&p).unwrap();
        assert_eq!(g.shape(), (1, 3));
        assert!((g.get(0, 1) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn save_load_is_idempotent() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::from_fn(5, 7, |r, c| ((r * 7 + c) as f64 / 34.0).sin().abs());
        for name in ["x.pgm", "x.png"] {
            let p = dir.path().join(name);
            save_grayscale(&p, &g).unwrap();
            let once = load_grayscale(&p).unwrap();
            save_grayscale(&p, &once).unwrap();
            let twice = load_grayscale(&p).unwrap();
            assert_eq!(once, twice);
            assert!(once.data().iter().zip(g.data()).all(|(a, b)| (a - b).abs() <= 0.5 / 255.0 + 1e-12));
        }
    }

    #[test]
    fn errors_name_the_path() {
        let err = load_grayscale("/definitely/not/here.pgm").unwrap_err();
        assert!(err.to_string().contains("/definitely/not/here.pgm"));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("junk.pgm");
        std::fs::write(&p, b"not an image").unwrap();
        let err = load_grayscale(&p).unwrap_err();
        assert!(err.to_string().contains("junk.pgm"), "{err}");
    }
}
