//! Image containers and resampling between resolution levels.
//!
//! Grids are row-major with nominal grayscale values in [0, 1]. Nothing
//! here clamps: solver output may leave the nominal range and is only
//! clamped at image export.

use crate::error::{Error, Result};
use crate::geometry::Homography;

/// Row-major grid of f64 samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ImageGrid {
    /// Wraps a row-major sample vector; the inverse of [`ImageGrid::pack`].
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter(format!(
                "image dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn constant(rows: usize, cols: usize, value: f64) -> Result<Self> {
        Self::new(rows, cols, vec![value; rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Flattens to a column vector in row-major order, so the sample at
    /// (row i, col j) lands at index i * cols + j.
    pub fn pack(&self) -> Vec<f64> {
        self.data.clone()
    }

    /// Bilinear sample at fractional coordinates (x = column, y = row) with
    /// stencil indices clamped to the grid, replicating the border.
    pub fn sample_clamped(&self, x: f64, y: f64) -> f64 {
        let gx = x.floor();
        let gy = y.floor();
        let u = x - gx;
        let t = y - gy;
        let cx = |ix: i64| ix.clamp(0, self.cols as i64 - 1) as usize;
        let cy = |iy: i64| iy.clamp(0, self.rows as i64 - 1) as usize;
        let (x0, x1) = (cx(gx as i64), cx(gx as i64 + 1));
        let (y0, y1) = (cy(gy as i64), cy(gy as i64 + 1));
        // nested lerps rather than a weighted sum: equal neighbors come back
        // bit-exact, so constant regions survive resampling unchanged
        let lerp = |a: f64, b: f64, s: f64| a + s * (b - a);
        let top = lerp(self.get(y0, x0), self.get(y0, x1), u);
        let bottom = lerp(self.get(y1, x0), self.get(y1, x1), u);
        lerp(top, bottom, t)
    }
}

/// Output dimensions of a grid scaled by `zoom`, rounded half up.
pub fn scaled_dims(dims: (usize, usize), zoom: f64) -> (usize, usize) {
    (
        (dims.0 as f64 * zoom).round() as usize,
        (dims.1 as f64 * zoom).round() as usize,
    )
}

/// Scales an image up by `zoom` under the integer-center convention: output
/// pixel (I, J) samples the source at (J / zoom, I / zoom). Constant images
/// are preserved exactly, and `zoom = 1` returns an identical copy.
pub fn upscale(img: &ImageGrid, zoom: f64) -> Result<ImageGrid> {
    if !zoom.is_finite() || zoom < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "zoom must be finite and >= 1, got {zoom}"
        )));
    }
    let (rows_h, cols_h) = scaled_dims(img.dims(), zoom);
    let mut data = Vec::with_capacity(rows_h * cols_h);
    for i in 0..rows_h {
        let y = i as f64 / zoom;
        for j in 0..cols_h {
            data.push(img.sample_clamped(j as f64 / zoom, y));
        }
    }
    ImageGrid::new(rows_h, cols_h, data)
}

/// A stack of equally sized low-resolution frames, each registered onto
/// frame 0 by its homography. Frame 0 is the reference and must carry the
/// identity.
#[derive(Debug, Clone)]
pub struct FrameSet {
    frames: Vec<ImageGrid>,
    homographies: Vec<Homography>,
}

impl FrameSet {
    pub fn new(frames: Vec<ImageGrid>, homographies: Vec<Homography>) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::EmptyFrameSet);
        }
        if homographies.len() != frames.len() {
            return Err(Error::DimensionMismatch {
                expected: frames.len(),
                got: homographies.len(),
            });
        }
        let dims = frames[0].dims();
        for (idx, f) in frames.iter().enumerate() {
            if f.dims() != dims {
                return Err(Error::InconsistentDimensions(format!(
                    "frame 0 is {}x{} but frame {idx} is {}x{}",
                    dims.0,
                    dims.1,
                    f.dims().0,
                    f.dims().1
                )));
            }
        }
        if !homographies[0].is_identity(1e-9) {
            return Err(Error::NonIdentityReference(format!(
                "{:?}",
                homographies[0].rows()
            )));
        }
        Ok(Self {
            frames,
            homographies,
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frames(&self) -> &[ImageGrid] {
        &self.frames
    }

    pub fn homographies(&self) -> &[Homography] {
        &self.homographies
    }

    /// (rows, cols) shared by every frame.
    pub fn frame_dims(&self) -> (usize, usize) {
        self.frames[0].dims()
    }
}

/// Warps every frame onto the reference grid, upscales by `zoom`, and
/// averages pixelwise. Each output pixel divides by the number of frames
/// whose footprint actually covers it; pixels no frame covers fall back to
/// the upscaled reference frame, so the result is total.
///
/// This is the standard prior for reconstruction: all the observed light,
/// none of the high-frequency content.
pub fn average_frames(fs: &FrameSet, zoom: f64) -> Result<ImageGrid> {
    if !zoom.is_finite() || zoom < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "zoom must be finite and >= 1, got {zoom}"
        )));
    }
    let (rows, cols) = fs.frame_dims();
    let (rows_h, cols_h) = scaled_dims((rows, cols), zoom);
    // reference -> frame maps; coverage is tested in each frame's own grid
    let inverses: Vec<Homography> = fs
        .homographies()
        .iter()
        .map(|h| h.invert())
        .collect::<Result<_>>()?;
    let x_max = cols as f64 - 1.0;
    let y_max = rows as f64 - 1.0;
    let mut data = Vec::with_capacity(rows_h * cols_h);
    for i in 0..rows_h {
        for j in 0..cols_h {
            let rx = j as f64 / zoom;
            let ry = i as f64 / zoom;
            let mut acc = 0.0;
            let mut covered = 0usize;
            for (frame, inv) in fs.frames().iter().zip(&inverses) {
                let Ok(q) = inv.transform_point(crate::geometry::Point2::new(rx, ry)) else {
                    continue;
                };
                if q.x >= 0.0 && q.x <= x_max && q.y >= 0.0 && q.y <= y_max {
                    acc += frame.sample_clamped(q.x, q.y);
                    covered += 1;
                }
            }
            data.push(if covered > 0 {
                acc / covered as f64
            } else {
                fs.frames()[0].sample_clamped(rx, ry)
            });
        }
    }
    ImageGrid::new(rows_h, cols_h, data)
}
