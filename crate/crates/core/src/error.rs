use std::path::PathBuf;

use thiserror::Error;

/// Unified error type for the reconstruction library.
///
/// Variants split into three rough classes that front ends may want to
/// distinguish: bad parameters (caller mistakes), bad data (files and
/// datasets), and numerical degeneracies (singular or near-singular maps).
#[derive(Debug, Error)]
pub enum Error {
    #[error("singular matrix: |det| = {det:.3e} is below the degeneracy tolerance")]
    SingularMatrix { det: f64 },

    #[error("degenerate projection: homogeneous w = {w:.3e} is too close to zero")]
    DegenerateProjection { w: f64 },

    #[error("transformed polygon is not convex")]
    NonConvexResult,

    #[error("operation requires a non-empty polygon")]
    EmptyPolygon,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("frame set is empty")]
    EmptyFrameSet,

    #[error("frames have inconsistent dimensions: {0}")]
    InconsistentDimensions(String),

    #[error("reference homography (frame 0) must be the identity: {0}")]
    NonIdentityReference(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("malformed homography file {}: {reason}", path.display())]
    MalformedHomography { path: PathBuf, reason: String },

    #[error("malformed image {}: {reason}", path.display())]
    MalformedImage { path: PathBuf, reason: String },

    #[error("malformed dataset manifest: {0}")]
    MalformedManifest(String),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
