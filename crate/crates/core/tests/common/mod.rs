//! Helpers shared by the integration test binaries: independent oracles
//! (Monte-Carlo polygon overlap, dense direct solves), random geometry
//! generators, synthetic targets, and error metrics.
//!
//! The oracles deliberately avoid the library's own clipping and iterative
//! solver code paths so that agreement between the two is meaningful.

#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use superres_core::geometry::{AxisRect, ConvexPolygon, Homography};
use superres_core::imaging::ImageGrid;
use superres_core::operator::SparseOperator;

// ============================================================================
// Monte-Carlo overlap oracle
// ============================================================================

/// Membership test against a convex polygon, accepting either vertex
/// orientation: the point must not lie strictly outside any edge.
pub fn point_in_convex(poly: &ConvexPolygon, x: f64, y: f64) -> bool {
    let v = poly.vertices();
    if v.len() < 3 {
        return false;
    }
    let mut saw_pos = false;
    let mut saw_neg = false;
    for i in 0..v.len() {
        let a = v[i];
        let b = v[(i + 1) % v.len()];
        let cross = (b.x - a.x) * (y - a.y) - (b.y - a.y) * (x - a.x);
        if cross > 0.0 {
            saw_pos = true;
        } else if cross < 0.0 {
            saw_neg = true;
        }
        if saw_pos && saw_neg {
            return false;
        }
    }
    true
}

/// Monte-Carlo estimate of the overlap area between a convex polygon and an
/// axis-aligned cell, from uniform samples in the cell. Returns the area
/// estimate together with its standard error.
pub fn mc_overlap_area<R: Rng>(
    poly: &ConvexPolygon,
    cell: &AxisRect,
    samples: usize,
    rng: &mut R,
) -> (f64, f64) {
    let mut hits = 0usize;
    for _ in 0..samples {
        let x = rng.gen_range(cell.x_min..cell.x_max);
        let y = rng.gen_range(cell.y_min..cell.y_max);
        if point_in_convex(poly, x, y) {
            hits += 1;
        }
    }
    let n = samples as f64;
    let p = hits as f64 / n;
    let cell_area = cell.area();
    let estimate = p * cell_area;
    let std_err = cell_area * (p * (1.0 - p) / n).sqrt();
    (estimate, std_err)
}

// ============================================================================
// Random geometry
// ============================================================================

/// Small rigid motion: rotation up to `max_rot_deg` about `(cx, cy)`
/// composed with a translation of up to `max_shift` pixels per axis.
pub fn random_motion<R: Rng>(
    rng: &mut R,
    max_shift: f64,
    max_rot_deg: f64,
    cx: f64,
    cy: f64,
) -> Homography {
    let tx = rng.gen_range(-max_shift..=max_shift);
    let ty = rng.gen_range(-max_shift..=max_shift);
    let theta = rng.gen_range(-max_rot_deg..=max_rot_deg) * PI / 180.0;
    Homography::rotation_about(theta, cx, cy).compose(&Homography::translation(tx, ty))
}

/// Random convex quadrilateral: a unit pixel square pushed through a mild
/// random projective map (rotation, anisotropic-ish shift, gentle projective
/// terms). Retries until the map keeps the square convex and finite.
pub fn random_quad<R: Rng>(rng: &mut R) -> ConvexPolygon {
    let unit = ConvexPolygon::from_rect(&AxisRect::centered_unit(0.0, 0.0));
    loop {
        let theta = rng.gen_range(-PI..PI);
        let s = rng.gen_range(0.6..1.8);
        let tx = rng.gen_range(-2.0..2.0);
        let ty = rng.gen_range(-2.0..2.0);
        let px = rng.gen_range(-0.08..0.08);
        let py = rng.gen_range(-0.08..0.08);
        let h = match Homography::from_rows([
            [s * theta.cos(), -s * theta.sin(), tx],
            [s * theta.sin(), s * theta.cos(), ty],
            [px, py, 1.0],
        ]) {
            Ok(h) => h,
            Err(_) => continue,
        };
        match h.transform_polygon(&unit) {
            Ok(q) if q.vertices().len() == 4 => return q,
            _ => continue,
        }
    }
}

// ============================================================================
// Dense direct solver oracle
// ============================================================================

/// Direct solve of the damped normal equations (A^T A + lambda I) dx = A^T b,
/// densifying the operator and factoring with Cholesky. Only sensible for
/// small systems; the point is independence from the iterative code.
pub fn dense_normal_solve(a: &SparseOperator, b_hat: &[f64], lambda: f64) -> Vec<f64> {
    assert_eq!(b_hat.len(), a.n_rows());
    let dense = a.to_dense();
    let n = a.n_cols();
    let m = a.n_rows();
    let mut g = vec![vec![0.0f64; n]; n];
    for row in &dense {
        for i in 0..n {
            if row[i] == 0.0 {
                continue;
            }
            for j in i..n {
                g[i][j] += row[i] * row[j];
            }
        }
    }
    for i in 0..n {
        g[i][i] += lambda;
        for j in 0..i {
            g[i][j] = g[j][i];
        }
    }
    let mut rhs = vec![0.0f64; n];
    for r in 0..m {
        for i in 0..n {
            rhs[i] += dense[r][i] * b_hat[r];
        }
    }
    cholesky_solve(&mut g, &mut rhs);
    rhs
}

/// In-place Cholesky factorization of a symmetric positive-definite matrix
/// followed by forward and back substitution; the solution lands in `rhs`.
fn cholesky_solve(g: &mut [Vec<f64>], rhs: &mut [f64]) {
    let n = rhs.len();
    for j in 0..n {
        let mut d = g[j][j];
        for k in 0..j {
            d -= g[j][k] * g[j][k];
        }
        assert!(d > 0.0, "matrix is not positive definite");
        let ljj = d.sqrt();
        g[j][j] = ljj;
        for i in (j + 1)..n {
            let mut s = g[i][j];
            for k in 0..j {
                s -= g[i][k] * g[j][k];
            }
            g[i][j] = s / ljj;
        }
    }
    // L y = rhs
    for i in 0..n {
        let mut s = rhs[i];
        for k in 0..i {
            s -= g[i][k] * rhs[k];
        }
        rhs[i] = s / g[i][i];
    }
    // L^T x = y
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for k in (i + 1)..n {
            s -= g[k][i] * rhs[k];
        }
        rhs[i] = s / g[i][i];
    }
}

// ============================================================================
// Synthetic targets
// ============================================================================

fn border_ramp(t: f64, len: f64) -> f64 {
    let s: f64 = (t / len).clamp(0.0, 1.0);
    0.5 - 0.5 * (PI * s).cos()
}

/// Smooth low-frequency content fading to black at the border with a
/// raised-cosine ramp `ramp_len` pixels wide. The fade keeps the target
/// consistent with the boundary skip policy, which zeroes observations whose
/// footprint would leave the image.
pub fn smooth_target(rows: usize, cols: usize, ramp_len: f64) -> ImageGrid {
    let (pr, pc) = (rows as f64, cols as f64);
    let data = (0..rows * cols)
        .map(|k| {
            let (i, j) = ((k / cols) as f64, (k % cols) as f64);
            let edge = i.min(pr - 1.0 - i).min(j).min(pc - 1.0 - j);
            let w = border_ramp(edge, ramp_len);
            w * (0.55
                + 0.25 * (2.0 * PI * i / pr).sin() * (2.0 * PI * j / pc).cos()
                + 0.1 * (2.0 * PI * (i + j) / (pr + pc)).sin())
        })
        .collect();
    ImageGrid::new(rows, cols, data).unwrap()
}

/// Sharp oscillating content with periods `p1` and `p2` (in pixels), faded to
/// black at the border. Frame averaging attenuates these periods strongly,
/// which is what gives a reconstruction room to beat the averaged baseline.
pub fn detail_target(rows: usize, cols: usize, ramp_len: f64, p1: f64, p2: f64) -> ImageGrid {
    let (pr, pc) = (rows as f64, cols as f64);
    let data = (0..rows * cols)
        .map(|k| {
            let (i, j) = ((k / cols) as f64, (k % cols) as f64);
            let edge = i.min(pr - 1.0 - i).min(j).min(pc - 1.0 - j);
            let w = border_ramp(edge, ramp_len);
            w * (0.5
                + 0.25 * (2.0 * PI * i / p1).sin() * (2.0 * PI * j / p1).cos()
                + 0.1 * (2.0 * PI * (i + j) / p2).sin())
        })
        .collect();
    ImageGrid::new(rows, cols, data).unwrap()
}

/// Hard-edged bright bars on a dark background (vertical stripes of width 6
/// on period 12, horizontal bands of width 8 on period 16), faded to black at
/// the border. Piecewise-flat content with step edges: point-sampling
/// operators cannot explain area-averaged observations of it consistently,
/// while overlap-weighted operators can.
pub fn bars_target(rows: usize, cols: usize) -> ImageGrid {
    let (pr, pc) = (rows as f64, cols as f64);
    let data = (0..rows * cols)
        .map(|k| {
            let (i, j) = (k / cols, k % cols);
            let edge = (i as f64)
                .min(pr - 1.0 - i as f64)
                .min(j as f64)
                .min(pc - 1.0 - j as f64);
            let w = border_ramp(edge, 8.0);
            let fg = if (j % 12) < 6 || (i % 16) < 8 { 1.0 } else { 0.0 };
            w * (0.15 + 0.7 * fg)
        })
        .collect();
    ImageGrid::new(rows, cols, data).unwrap()
}

// ============================================================================
// Metrics
// ============================================================================

/// Relative L2 error over the interior, excluding a `margin`-pixel border
/// where the boundary skip policy leaves observations empty.
pub fn interior_rel_err(img: &ImageGrid, truth: &ImageGrid, margin: usize) -> f64 {
    assert_eq!(img.dims(), truth.dims());
    let (rows, cols) = img.dims();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in margin..rows - margin {
        for j in margin..cols - margin {
            let d = img.get(i, j) - truth.get(i, j);
            num += d * d;
            den += truth.get(i, j) * truth.get(i, j);
        }
    }
    (num / den).sqrt()
}

/// Anisotropic total variation (sum of absolute horizontal and vertical
/// neighbor differences) over the interior, excluding a `margin`-pixel border.
pub fn interior_tv(img: &ImageGrid, margin: usize) -> f64 {
    let (rows, cols) = img.dims();
    let mut tv = 0.0;
    for i in margin..rows - margin {
        for j in margin..cols - margin {
            if j + 1 < cols - margin {
                tv += (img.get(i, j + 1) - img.get(i, j)).abs();
            }
            if i + 1 < rows - margin {
                tv += (img.get(i + 1, j) - img.get(i, j)).abs();
            }
        }
    }
    tv
}

/// Relative L2 distance between two vectors.
pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let num: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(1e-300)
}
