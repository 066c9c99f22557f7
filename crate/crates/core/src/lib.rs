//! Super-resolution reconstruction from stacks of registered low-resolution
//! frames.
//!
//! Each observed frame `b(i)` is modeled as a sparse linear view of an
//! unknown high-resolution image `x`:
//!
//! ```text
//! b(i) = A(i) x
//! ```
//!
//! where `A(i)` encodes the frame's registration homography and the
//! decimation between the two grids. Stacking all frames gives an
//! overdetermined system that is solved as damped least squares around a
//! cheap prior estimate.
//!
//! The crate provides two interpolation operators for building `A(i)`:
//!
//! * [`operator::OperatorKind::Bilinear`]: classic 4-point bilinear
//!   interpolation at the projected pixel center.
//! * [`operator::OperatorKind::Polygon`]: projects each low-resolution
//!   pixel's footprint onto the high-resolution grid and weights every
//!   overlapped cell by exact polygon-clipping area. Rows are wider but
//!   model the integration over a sensor cell instead of point sampling,
//!   which suppresses interpolation artifacts at large zoom factors.
//!
//! Two matrix-free solvers are included: conjugate gradients on the damped
//! normal equations and a damped LSQR. Both only need `A x` and `Aᵀ y`
//! products.
//!
//! [`pipeline`] holds the end-to-end entry points: [`pipeline::load_dataset`],
//! [`pipeline::generate_synthetic`], and [`pipeline::run_reconstruction`].

pub mod error;
pub mod geometry;
pub mod imaging;
pub mod operator;
pub mod pgm;
pub mod pipeline;
pub mod solver;

pub use error::{Error, Result};
