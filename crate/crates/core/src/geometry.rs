//! Planar geometry for mapping pixel footprints between image grids.
//!
//! Coordinates follow the integer-center convention: the pixel at
//! (row i, column j) has its center at (x, y) = (j, i) and occupies the
//! unit cell [j - 0.5, j + 0.5] x [i - 0.5, i + 0.5]. Points transform as
//! homogeneous column vectors (x, y, 1)^T with perspective division.

use crate::error::{Error, Result};

/// Relative tolerance for singularity and degenerate-projection tests,
/// scaled by the largest absolute matrix entry.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Clipped remnants smaller than this fraction of the clip rectangle are
/// treated as empty; they carry no signal, only rounding noise.
pub const SLIVER_REL_AREA: f64 = 1e-12;

/// Relative tolerance (on the sine of the turn angle) below which a vertex
/// triple counts as collinear rather than a convexity violation.
const CONVEXITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// A 3x3 projective transform acting on homogeneous image coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    m: [[f64; 3]; 3],
}

impl Homography {
    /// Builds a homography from row-major entries, rejecting non-finite or
    /// singular matrices.
    pub fn from_rows(m: [[f64; 3]; 3]) -> Result<Self> {
        if m.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "homography entries must be finite".into(),
            ));
        }
        let h = Self { m };
        let det = h.det();
        if det.abs() <= h.degeneracy_tolerance() {
            return Err(Error::SingularMatrix { det });
        }
        Ok(h)
    }

    pub fn identity() -> Self {
        Self {
            m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    pub fn translation(tx: f64, ty: f64) -> Self {
        Self {
            m: [[1.0, 0.0, tx], [0.0, 1.0, ty], [0.0, 0.0, 1.0]],
        }
    }

    /// Isotropic scaling of the plane, diag(s, s, 1).
    pub fn scaling(s: f64) -> Self {
        Self {
            m: [[s, 0.0, 0.0], [0.0, s, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    /// Rotation by `theta` radians about the origin.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            m: [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    /// Rotation by `theta` radians about the point (cx, cy).
    pub fn rotation_about(theta: f64, cx: f64, cy: f64) -> Self {
        Self::translation(cx, cy)
            .compose(&Self::rotation(theta))
            .compose(&Self::translation(-cx, -cy))
    }

    pub fn rows(&self) -> [[f64; 3]; 3] {
        self.m
    }

    /// Matrix product `self * rhs`: applies `rhs` first, then `self`.
    pub fn compose(&self, rhs: &Homography) -> Homography {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, out) in row.iter_mut().enumerate() {
                *out = (0..3).map(|k| self.m[i][k] * rhs.m[k][j]).sum();
            }
        }
        Homography { m }
    }

    pub fn det(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    fn max_abs_entry(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    fn degeneracy_tolerance(&self) -> f64 {
        DEGENERACY_TOL * self.max_abs_entry()
    }

    /// Inverse via the adjugate. The product `h.invert() * h` equals the
    /// identity up to roundoff (projectively, up to a scalar).
    pub fn invert(&self) -> Result<Homography> {
        let det = self.det();
        if det.abs() <= self.degeneracy_tolerance() {
            return Err(Error::SingularMatrix { det });
        }
        let m = &self.m;
        let cof = |r1: usize, r2: usize, c1: usize, c2: usize| {
            m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1]
        };
        let adj = [
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ];
        let mut inv = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                inv[i][j] = adj[i][j] / det;
            }
        }
        Ok(Homography { m: inv })
    }

    /// Maps a point through the homography with perspective division.
    pub fn transform_point(&self, p: Point2) -> Result<Point2> {
        let m = &self.m;
        let w = m[2][0] * p.x + m[2][1] * p.y + m[2][2];
        if w.abs() <= self.degeneracy_tolerance() {
            return Err(Error::DegenerateProjection { w });
        }
        Ok(Point2::new(
            (m[0][0] * p.x + m[0][1] * p.y + m[0][2]) / w,
            (m[1][0] * p.x + m[1][1] * p.y + m[1][2]) / w,
        ))
    }

    /// Maps each vertex through the homography and re-normalizes winding to
    /// counter-clockwise; projective maps may flip orientation.
    ///
    /// A quad that collapses to a collinear sliver is returned as-is (its
    /// area is zero downstream); a genuine fold-over, where the polygon
    /// straddles the line the map sends to infinity, is rejected.
    pub fn transform_polygon(&self, poly: &ConvexPolygon) -> Result<ConvexPolygon> {
        if poly.is_empty() {
            return Ok(ConvexPolygon::empty());
        }
        let mut vertices = Vec::with_capacity(poly.vertices().len());
        for &v in poly.vertices() {
            vertices.push(self.transform_point(v)?);
        }
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        if !convex_within_tolerance(&vertices) {
            return Err(Error::NonConvexResult);
        }
        Ok(ConvexPolygon { vertices })
    }

    /// True when the projectively normalized matrix (last entry scaled to 1)
    /// is within `tol` of the identity, entrywise.
    pub fn is_identity(&self, tol: f64) -> bool {
        let w = self.m[2][2];
        if w.abs() <= self.degeneracy_tolerance() {
            return false;
        }
        let id = Homography::identity().m;
        for i in 0..3 {
            for j in 0..3 {
                if (self.m[i][j] / w - id[i][j]).abs() > tol {
                    return false;
                }
            }
        }
        true
    }
}

/// Composes the map that carries low-resolution frame coordinates onto the
/// high-resolution grid: diag(z, z, 1) * h, where `h` registers the frame
/// onto the reference frame. This is the inverse of the decimation model
/// (reference-to-frame homography followed by 1/z down-scaling).
pub fn lowres_to_highres(h: &Homography, zoom: f64) -> Result<Homography> {
    if !zoom.is_finite() || zoom < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "zoom must be finite and >= 1, got {zoom}"
        )));
    }
    Ok(Homography::scaling(zoom).compose(h))
}

/// Axis-aligned rectangle. Zero extent is permitted (a degenerate polygon
/// can floor/ceil to a single coordinate); clipping against it yields an
/// empty polygon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisRect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl AxisRect {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let vals = [x_min, x_max, y_min, y_max];
        if vals.iter().any(|v| !v.is_finite()) || x_min > x_max || y_min > y_max {
            return Err(Error::InvalidParameter(format!(
                "invalid rectangle [{x_min}, {x_max}] x [{y_min}, {y_max}]"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            y_min,
            y_max,
        })
    }

    /// The unit cell of the pixel centered at (cx, cy).
    pub fn centered_unit(cx: f64, cy: f64) -> Self {
        Self {
            x_min: cx - 0.5,
            x_max: cx + 0.5,
            y_min: cy - 0.5,
            y_max: cy + 0.5,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }
}

/// A convex polygon with counter-clockwise vertices, or the empty polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
}

impl ConvexPolygon {
    pub fn empty() -> Self {
        Self {
            vertices: Vec::new(),
        }
    }

    /// Validates the vertex list (finite, at least 3 vertices, convex within
    /// tolerance) and normalizes winding to counter-clockwise. Collinear
    /// triples are accepted; the polygon may be degenerate with zero area.
    pub fn new(vertices: Vec<Point2>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidParameter(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "polygon vertices must be finite".into(),
            ));
        }
        let mut vertices = vertices;
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        if !convex_within_tolerance(&vertices) {
            return Err(Error::NonConvexResult);
        }
        Ok(Self { vertices })
    }

    pub fn from_rect(r: &AxisRect) -> Self {
        Self {
            vertices: vec![
                Point2::new(r.x_min, r.y_min),
                Point2::new(r.x_max, r.y_min),
                Point2::new(r.x_max, r.y_max),
                Point2::new(r.x_min, r.y_max),
            ],
        }
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Shoelace area, non-negative. Degenerate polygons (fewer than three
    /// vertices, or collinear) have zero area.
    pub fn area(&self) -> f64 {
        signed_area(&self.vertices).abs()
    }

    /// Integer-snapped bounding box: floor of the minima, ceiling of the
    /// maxima, so every covered unit cell index falls inside.
    pub fn bounding_box(&self) -> Result<AxisRect> {
        if self.vertices.is_empty() {
            return Err(Error::EmptyPolygon);
        }
        let mut x_min = f64::INFINITY;
        let mut x_max = f64::NEG_INFINITY;
        let mut y_min = f64::INFINITY;
        let mut y_max = f64::NEG_INFINITY;
        for v in &self.vertices {
            x_min = x_min.min(v.x);
            x_max = x_max.max(v.x);
            y_min = y_min.min(v.y);
            y_max = y_max.max(v.y);
        }
        AxisRect::new(x_min.floor(), x_max.ceil(), y_min.floor(), y_max.ceil())
    }

    /// Clips the polygon against each edge of `rect` in turn (left, right,
    /// bottom, top half-planes). Convexity and winding are preserved by
    /// construction. Remnants below `SLIVER_REL_AREA` of the rectangle's
    /// area collapse to the empty polygon.
    pub fn clip_to_rect(&self, rect: &AxisRect) -> ConvexPolygon {
        if self.vertices.len() < 3 {
            return ConvexPolygon::empty();
        }
        let mut verts = self.vertices.clone();
        for pass in 0..4 {
            verts = match pass {
                0 => clip_half_plane(&verts, rect.x_min, Axis::X, Side::AtLeast),
                1 => clip_half_plane(&verts, rect.x_max, Axis::X, Side::AtMost),
                2 => clip_half_plane(&verts, rect.y_min, Axis::Y, Side::AtLeast),
                _ => clip_half_plane(&verts, rect.y_max, Axis::Y, Side::AtMost),
            };
            if verts.is_empty() {
                return ConvexPolygon::empty();
            }
        }
        dedup_consecutive(&mut verts);
        if verts.len() < 3 {
            return ConvexPolygon::empty();
        }
        let poly = ConvexPolygon { vertices: verts };
        if poly.area() < SLIVER_REL_AREA * rect.area() {
            return ConvexPolygon::empty();
        }
        poly
    }
}

#[derive(Clone, Copy)]
enum Axis {
    X,
    Y,
}

#[derive(Clone, Copy)]
enum Side {
    AtLeast,
    AtMost,
}

/// One Sutherland-Hodgman pass against an axis-aligned half-plane. Points
/// exactly on the boundary count as inside; crossing edges insert a vertex
/// with the clipped coordinate set exactly to `bound`.
fn clip_half_plane(verts: &[Point2], bound: f64, axis: Axis, side: Side) -> Vec<Point2> {
    let coord = |p: &Point2| match axis {
        Axis::X => p.x,
        Axis::Y => p.y,
    };
    let inside = |p: &Point2| match side {
        Side::AtLeast => coord(p) >= bound,
        Side::AtMost => coord(p) <= bound,
    };
    let intersect = |a: &Point2, b: &Point2| {
        let t = (bound - coord(a)) / (coord(b) - coord(a));
        match axis {
            Axis::X => Point2::new(bound, a.y + t * (b.y - a.y)),
            Axis::Y => Point2::new(a.x + t * (b.x - a.x), bound),
        }
    };
    let mut out = Vec::with_capacity(verts.len() + 1);
    for (idx, a) in verts.iter().enumerate() {
        let b = &verts[(idx + 1) % verts.len()];
        let ia = inside(a);
        if ia {
            out.push(*a);
        }
        if ia != inside(b) {
            out.push(intersect(a, b));
        }
    }
    out
}

fn dedup_consecutive(verts: &mut Vec<Point2>) {
    if verts.len() < 2 {
        return;
    }
    let mut kept: Vec<Point2> = Vec::with_capacity(verts.len());
    for &v in verts.iter() {
        if kept.last() != Some(&v) {
            kept.push(v);
        }
    }
    if kept.len() > 1 && kept.first() == kept.last() {
        kept.pop();
    }
    *verts = kept;
}

/// Signed shoelace area: positive for counter-clockwise vertex order.
fn signed_area(verts: &[Point2]) -> f64 {
    if verts.len() < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for (idx, a) in verts.iter().enumerate() {
        let b = &verts[(idx + 1) % verts.len()];
        acc += a.x * b.y - b.x * a.y;
    }
    0.5 * acc
}

/// Convexity test for a counter-clockwise vertex list: every turn must be
/// left or collinear within tolerance (scaled by the adjacent edge lengths).
fn convex_within_tolerance(verts: &[Point2]) -> bool {
    let n = verts.len();
    if n < 3 {
        return true;
    }
    for i in 0..n {
        let a = verts[i];
        let b = verts[(i + 1) % n];
        let c = verts[(i + 2) % n];
        let (e1x, e1y) = (b.x - a.x, b.y - a.y);
        let (e2x, e2y) = (c.x - b.x, c.y - b.y);
        let cross = e1x * e2y - e1y * e2x;
        let scale = (e1x * e1x + e1y * e1y).sqrt() * (e2x * e2x + e2y * e2y).sqrt();
        if cross < -CONVEXITY_TOL * scale {
            return false;
        }
    }
    true
}
