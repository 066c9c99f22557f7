//! Sparse imaging operators linking a high-resolution image to observed
//! low-resolution frames.
//!
//! Each operator row corresponds to one low-resolution pixel. Its weights
//! say how much of each high-resolution pixel contributes to that sample
//! under the frame's registration homography and the decimation factor.
//! Two constructions are provided: a 4-point bilinear stencil at the warped
//! pixel center, and the footprint operator that transforms the pixel's
//! unit cell and distributes weight by exact overlap area with each
//! high-resolution cell. Rows whose footprint leaves the high-resolution
//! image are left empty rather than truncated.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{lowres_to_highres, AxisRect, ConvexPolygon, Homography, Point2};
use crate::imaging::scaled_dims;

/// Weights below this threshold (relative to a unit cell) are dropped
/// before bounds checks and normalization; they are rounding noise.
pub const WEIGHT_CUTOFF: f64 = 1e-12;

/// Slack for deciding whether a transformed corner is still inside the
/// high-resolution image domain.
const DOMAIN_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Bilinear,
    Polygon,
}

/// Row-compressed sparse matrix specialized for imaging operators:
/// immutable after construction, rows may be empty, column indices are
/// strictly increasing within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseOperator {
    /// Assembles from per-row entry lists. Each row must hold finite
    /// weights at strictly increasing column indices below `n_cols`.
    pub fn from_rows(n_cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n_rows = rows.len();
        let nnz = rows.iter().map(Vec::len).sum();
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for row in rows {
            let mut prev: Option<usize> = None;
            for (col, w) in row {
                if col >= n_cols {
                    return Err(Error::DimensionMismatch {
                        expected: n_cols,
                        got: col,
                    });
                }
                if prev.is_some_and(|p| p >= col) {
                    return Err(Error::InvalidParameter(
                        "row columns must be strictly increasing".into(),
                    ));
                }
                if !w.is_finite() {
                    return Err(Error::InvalidParameter(
                        "operator weights must be finite".into(),
                    ));
                }
                prev = Some(col);
                col_idx.push(col);
                values.push(w);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// Column indices and weights of row `m`.
    pub fn row(&self, m: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_ptr[m], self.row_ptr[m + 1]);
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    /// y = A x.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_cols {
            return Err(Error::DimensionMismatch {
                expected: self.n_cols,
                got: x.len(),
            });
        }
        let mut y = Vec::with_capacity(self.n_rows);
        for m in 0..self.n_rows {
            let (cols, vals) = self.row(m);
            let mut acc = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            y.push(acc);
        }
        Ok(y)
    }

    /// x = A^T y.
    pub fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.n_rows {
            return Err(Error::DimensionMismatch {
                expected: self.n_rows,
                got: y.len(),
            });
        }
        let mut x = vec![0.0; self.n_cols];
        for m in 0..self.n_rows {
            let (cols, vals) = self.row(m);
            let ym = y[m];
            for (&c, &v) in cols.iter().zip(vals) {
                x[c] += v * ym;
            }
        }
        Ok(x)
    }

    /// Stacks operators vertically; all must share the same column count.
    pub fn stack(ops: &[SparseOperator]) -> Result<SparseOperator> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidParameter("cannot stack zero operators".into()))?;
        let n_cols = first.n_cols;
        let n_rows = ops.iter().map(|a| a.n_rows).sum();
        let nnz = ops.iter().map(|a| a.nnz()).sum();
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for a in ops {
            if a.n_cols != n_cols {
                return Err(Error::DimensionMismatch {
                    expected: n_cols,
                    got: a.n_cols,
                });
            }
            let base = col_idx.len();
            row_ptr.extend(a.row_ptr[1..].iter().map(|p| p + base));
            col_idx.extend_from_slice(&a.col_idx);
            values.extend_from_slice(&a.values);
        }
        Ok(SparseOperator {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Flags rows that carry at least one weight. Empty rows mark
    /// low-resolution pixels whose footprint left the high-resolution image;
    /// their observations carry no usable signal.
    pub fn row_coverage(&self) -> Vec<bool> {
        (0..self.n_rows)
            .map(|m| self.row_ptr[m + 1] > self.row_ptr[m])
            .collect()
    }

    /// Writes the sparsity structure as text, one row per line:
    /// `row_index: (col, weight) (col, weight) ...`.
    pub fn write_sparsity<W: Write>(&self, w: &mut W) -> io::Result<()> {
        for m in 0..self.n_rows {
            write!(w, "{m}:")?;
            let (cols, vals) = self.row(m);
            for (&c, &v) in cols.iter().zip(vals) {
                write!(w, " ({c}, {v})")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Dense copy, row-major. Intended for small operators in diagnostics
    /// and tests.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n_cols]; self.n_rows];
        for m in 0..self.n_rows {
            let (cols, vals) = self.row(m);
            for (&c, &v) in cols.iter().zip(vals) {
                out[m][c] = v;
            }
        }
        out
    }
}

/// Bilinear stencil at a fractional grid position: the four surrounding
/// integer grid points (gx, gy) with weights
/// (1-u)(1-t), t(1-u), u(1-t), ut for u = x - floor(x), t = y - floor(y).
/// Weights always sum to exactly 1; zero weights are included.
pub fn bilinear_weights(p: Point2) -> [((i64, i64), f64); 4] {
    let fx = p.x.floor();
    let fy = p.y.floor();
    let u = p.x - fx;
    let t = p.y - fy;
    let (gx, gy) = (fx as i64, fy as i64);
    [
        ((gx, gy), (1.0 - u) * (1.0 - t)),
        ((gx, gy + 1), t * (1.0 - u)),
        ((gx + 1, gy), u * (1.0 - t)),
        ((gx + 1, gy + 1), u * t),
    ]
}

struct BuildContext {
    map: Homography,
    rows_low: usize,
    cols_low: usize,
    rows_high: usize,
    cols_high: usize,
}

fn build_context(h: &Homography, zoom: f64, low_dims: (usize, usize)) -> Result<BuildContext> {
    let (rows_low, cols_low) = low_dims;
    if rows_low == 0 || cols_low == 0 {
        return Err(Error::InvalidParameter(format!(
            "frame dimensions must be positive, got {rows_low}x{cols_low}"
        )));
    }
    let (rows_high, cols_high) = scaled_dims(low_dims, zoom);
    Ok(BuildContext {
        map: lowres_to_highres(h, zoom)?,
        rows_low,
        cols_low,
        rows_high,
        cols_high,
    })
}

/// Builds the bilinear interpolation operator for one frame: every
/// low-resolution pixel center is warped onto the high-resolution grid and
/// reads its value from the 4-point bilinear stencil there (at most 4
/// weights per row, summing to 1). A row is emptied when any stencil point
/// carrying weight falls outside the grid, or when the center cannot be
/// mapped at all.
pub fn build_bilinear(
    h: &Homography,
    zoom: f64,
    low_dims: (usize, usize),
) -> Result<SparseOperator> {
    let ctx = build_context(h, zoom, low_dims)?;
    let n_cols = ctx.rows_high * ctx.cols_high;
    let rows: Vec<Vec<(usize, f64)>> = (0..ctx.rows_low * ctx.cols_low)
        .into_par_iter()
        .map(|m| {
            let i = m / ctx.cols_low;
            let j = m % ctx.cols_low;
            let center = Point2::new(j as f64, i as f64);
            let Ok(p) = ctx.map.transform_point(center) else {
                return Vec::new();
            };
            let mut row: Vec<(usize, f64)> = Vec::with_capacity(4);
            for ((gx, gy), w) in bilinear_weights(p) {
                if w <= WEIGHT_CUTOFF {
                    continue;
                }
                if gx < 0 || gy < 0 || gx >= ctx.cols_high as i64 || gy >= ctx.rows_high as i64 {
                    return Vec::new();
                }
                row.push((gy as usize * ctx.cols_high + gx as usize, w));
            }
            row.sort_unstable_by_key(|&(col, _)| col);
            row
        })
        .collect();
    SparseOperator::from_rows(n_cols, rows)
}

/// Builds the footprint operator for one frame: each low-resolution pixel's
/// unit cell is transformed onto the high-resolution grid as a convex quad,
/// and every high-resolution cell inside the quad's integer bounding box
/// receives the exact clipped overlap area as its weight. Rows are
/// normalized to unit sum, so the operator averages the light under the
/// footprint. A row is emptied when any transformed corner leaves the
/// high-resolution image domain.
pub fn build_polygon(
    h: &Homography,
    zoom: f64,
    low_dims: (usize, usize),
) -> Result<SparseOperator> {
    let ctx = build_context(h, zoom, low_dims)?;
    let n_cols = ctx.rows_high * ctx.cols_high;
    // image domain is the union of all pixel cells
    let x_lo = -0.5 - DOMAIN_SLACK;
    let x_hi = ctx.cols_high as f64 - 0.5 + DOMAIN_SLACK;
    let y_lo = -0.5 - DOMAIN_SLACK;
    let y_hi = ctx.rows_high as f64 - 0.5 + DOMAIN_SLACK;
    let rows: Vec<Vec<(usize, f64)>> = (0..ctx.rows_low * ctx.cols_low)
        .into_par_iter()
        .map(|m| {
            let i = m / ctx.cols_low;
            let j = m % ctx.cols_low;
            let cell = ConvexPolygon::from_rect(&AxisRect::centered_unit(j as f64, i as f64));
            // unmappable cells (degenerate projection, fold-over) are skipped
            let Ok(quad) = ctx.map.transform_polygon(&cell) else {
                return Vec::new();
            };
            if quad
                .vertices()
                .iter()
                .any(|v| v.x < x_lo || v.x > x_hi || v.y < y_lo || v.y > y_hi)
            {
                return Vec::new();
            }
            let Ok(bb) = quad.bounding_box() else {
                return Vec::new();
            };
            let gx0 = (bb.x_min as i64).max(0) as usize;
            let gx1 = (bb.x_max as i64).min(ctx.cols_high as i64 - 1).max(0) as usize;
            let gy0 = (bb.y_min as i64).max(0) as usize;
            let gy1 = (bb.y_max as i64).min(ctx.rows_high as i64 - 1).max(0) as usize;
            let mut row: Vec<(usize, f64)> = Vec::new();
            for gy in gy0..=gy1 {
                for gx in gx0..=gx1 {
                    let cell = AxisRect::centered_unit(gx as f64, gy as f64);
                    let area = quad.clip_to_rect(&cell).area();
                    if area > WEIGHT_CUTOFF {
                        row.push((gy * ctx.cols_high + gx, area));
                    }
                }
            }
            let total: f64 = row.iter().map(|&(_, a)| a).sum();
            if total <= 0.0 {
                return Vec::new();
            }
            for entry in &mut row {
                entry.1 /= total;
            }
            row
        })
        .collect();
    SparseOperator::from_rows(n_cols, rows)
}

/// Dispatches to the selected construction.
pub fn build_operator(
    kind: OperatorKind,
    h: &Homography,
    zoom: f64,
    low_dims: (usize, usize),
) -> Result<SparseOperator> {
    match kind {
        OperatorKind::Bilinear => build_bilinear(h, zoom, low_dims),
        OperatorKind::Polygon => build_polygon(h, zoom, low_dims),
    }
}
