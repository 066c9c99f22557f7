//! End-to-end reconstruction: dataset loading, synthetic test data, and
//! the full solve from a registered frame stack to a high-resolution image.
//!
//! A dataset is a directory with a `dataset.txt` manifest, one frame per
//! line: `<image-file> <homography-file>`. Homography files hold 9
//! whitespace-separated reals, row-major; they are normalized so the last
//! entry is 1 on load. The first manifest line is the reference frame and
//! must carry the identity.

use std::fmt;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Homography;
use crate::imaging::{average_frames, scaled_dims, FrameSet, ImageGrid};
use crate::operator::{build_operator, OperatorKind, SparseOperator};
use crate::pgm;
use crate::solver::{reconstruct, SolveConfig, SolveReport};

/// Starting estimate handed to the solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prior {
    /// Warp every frame onto the reference, upscale, and average. Cheap,
    /// total, and contains all the observed light at low frequency.
    AverageUpscaled,
    /// All zeros; reconstruction must explain everything from the data.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionConfig {
    /// Decimation factor between the high-resolution grid and the frames.
    pub zoom: f64,
    /// Damping weight; overrides `solver.lambda`.
    pub lambda: f64,
    pub operator: OperatorKind,
    pub solver: SolveConfig,
    pub prior: Prior,
}

impl ReconstructionConfig {
    fn validate(&self) -> Result<()> {
        if !self.zoom.is_finite() || self.zoom <= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "zoom must be finite and > 1, got {}",
                self.zoom
            )));
        }
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "lambda must be finite and >= 0, got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

fn parse_homography_file(path: &Path) -> Result<Homography> {
    let malformed = |reason: String| Error::MalformedHomography {
        path: path.to_path_buf(),
        reason,
    };
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path.to_path_buf())
        } else {
            Error::Io {
                path: path.to_path_buf(),
                source: e,
            }
        }
    })?;
    let vals: Vec<f64> = text
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| malformed(format!("bad number '{t}'")))
        })
        .collect::<Result<_>>()?;
    if vals.len() != 9 {
        return Err(malformed(format!("expected 9 values, got {}", vals.len())));
    }
    let w = vals[8];
    let max_abs = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !w.is_finite() || w.abs() <= 1e-12 * max_abs {
        return Err(malformed("last entry is (near) zero, cannot normalize".into()));
    }
    let mut m = [[0.0; 3]; 3];
    for (k, v) in vals.iter().enumerate() {
        m[k / 3][k % 3] = v / w;
    }
    // A well-formed file holding a singular matrix is a numerical failure,
    // not a parse failure; keep it distinguishable for exit-code mapping.
    match Homography::from_rows(m) {
        Err(e @ Error::SingularMatrix { .. }) => Err(e),
        Err(e) => Err(malformed(e.to_string())),
        Ok(h) => Ok(h),
    }
}

fn write_homography_file(path: &Path, h: &Homography) -> Result<()> {
    let m = h.rows();
    let text = m
        .iter()
        .map(|row| format!("{} {} {}", row[0], row[1], row[2]))
        .collect::<Vec<_>>()
        .join("\n")
        + "\n";
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Loads a dataset directory (see the module docs for the layout) into a
/// frame stack with its registration homographies.
pub fn load_dataset(dir: &Path) -> Result<FrameSet> {
    let manifest = dir.join("dataset.txt");
    let text = std::fs::read_to_string(&manifest).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(manifest.clone())
        } else {
            Error::Io {
                path: manifest.clone(),
                source: e,
            }
        }
    })?;
    let mut frames = Vec::new();
    let mut homographies = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::MalformedManifest(format!(
                "{}:{}: expected '<image-file> <homography-file>', got '{line}'",
                manifest.display(),
                lineno + 1
            )));
        }
        frames.push(pgm::read_image(&dir.join(fields[0]))?);
        homographies.push(parse_homography_file(&dir.join(fields[1]))?);
    }
    FrameSet::new(frames, homographies)
}

/// Writes a frame stack as a loadable dataset directory: 16-bit PGM frames,
/// homography text files, and the `dataset.txt` manifest.
pub fn save_dataset(dir: &Path, fs: &FrameSet) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let mut manifest = String::new();
    for (i, (frame, h)) in fs.frames().iter().zip(fs.homographies()).enumerate() {
        let frame_name = format!("frame_{i:03}.pgm");
        let hom_name = format!("hom_{i:03}.txt");
        pgm::write_pgm16(&dir.join(&frame_name), frame)?;
        write_homography_file(&dir.join(&hom_name), h)?;
        manifest.push_str(&format!("{frame_name} {hom_name}\n"));
    }
    let path = dir.join("dataset.txt");
    std::fs::write(&path, manifest).map_err(|e| Error::Io { path, source: e })
}

/// Renders `k` synthetic low-resolution frames of `truth` under random
/// sub-pixel motions, using the footprint (area-overlap) imaging model, and
/// adds i.i.d. Gaussian noise of standard deviation `noise_sigma`.
///
/// Frame 0 is the unshifted reference; frames 1..k draw uniform sub-pixel
/// translations and small rotations about the image center. The same seed
/// reproduces the frame stack bit for bit. Also returns the ground-truth
/// homographies (identical to the ones carried by the frame set, since
/// registration is assumed exact).
pub fn generate_synthetic(
    truth: &ImageGrid,
    k: usize,
    zoom: f64,
    noise_sigma: f64,
    seed: u64,
) -> Result<(FrameSet, Vec<Homography>)> {
    if k == 0 {
        return Err(Error::InvalidParameter("need at least 1 frame".into()));
    }
    if !zoom.is_finite() || zoom < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "zoom must be finite and >= 1, got {zoom}"
        )));
    }
    if !noise_sigma.is_finite() || noise_sigma < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "noise sigma must be finite and >= 0, got {noise_sigma}"
        )));
    }
    let (rows_h, cols_h) = truth.dims();
    let low_dims = (
        (rows_h as f64 / zoom).round() as usize,
        (cols_h as f64 / zoom).round() as usize,
    );
    if scaled_dims(low_dims, zoom) != (rows_h, cols_h) {
        return Err(Error::InvalidParameter(format!(
            "truth dimensions {rows_h}x{cols_h} are not a zoom-{zoom} multiple of a whole frame size"
        )));
    }
    if low_dims.0 < 8 || low_dims.1 < 8 {
        return Err(Error::InvalidParameter(format!(
            "down-sampled frames would be {}x{}; need at least 8x8",
            low_dims.0, low_dims.1
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cx = (low_dims.1 - 1) as f64 / 2.0;
    let cy = (low_dims.0 - 1) as f64 / 2.0;
    let mut homographies = vec![Homography::identity()];
    for _ in 1..k {
        let tx: f64 = rng.gen_range(-0.5..0.5);
        let ty: f64 = rng.gen_range(-0.5..0.5);
        let theta: f64 = rng.gen_range(-0.5f64.to_radians()..0.5f64.to_radians());
        homographies
            .push(Homography::rotation_about(theta, cx, cy).compose(&Homography::translation(tx, ty)));
    }
    // per-frame noise streams, drawn up front so frame rendering can run in
    // any order without perturbing determinism
    let noise_seeds: Vec<u64> = (0..k).map(|_| rng.gen()).collect();

    let truth_packed = truth.pack();
    let frames: Vec<ImageGrid> = homographies
        .par_iter()
        .zip(noise_seeds)
        .map(|(h, noise_seed)| {
            let a = build_operator(OperatorKind::Polygon, h, zoom, low_dims)?;
            let mut b = a.apply(&truth_packed)?;
            if noise_sigma > 0.0 {
                let normal = Normal::new(0.0, noise_sigma)
                    .map_err(|e| Error::InvalidParameter(e.to_string()))?;
                let mut noise_rng = ChaCha8Rng::seed_from_u64(noise_seed);
                for v in &mut b {
                    *v += normal.sample(&mut noise_rng);
                }
            }
            ImageGrid::new(low_dims.0, low_dims.1, b)
        })
        .collect::<Result<_>>()?;

    let fs = FrameSet::new(frames, homographies.clone())?;
    Ok((fs, homographies))
}

/// Builds each frame's operator and stacks them into the joint system
/// matrix, frames in order.
pub fn build_stacked_operator(
    fs: &FrameSet,
    kind: OperatorKind,
    zoom: f64,
) -> Result<SparseOperator> {
    let low_dims = fs.frame_dims();
    let ops: Vec<SparseOperator> = fs
        .homographies()
        .par_iter()
        .map(|h| build_operator(kind, h, zoom, low_dims))
        .collect::<Result<_>>()?;
    SparseOperator::stack(&ops)
}

/// Full reconstruction: stacks the per-frame operators, forms the prior,
/// and solves the damped least-squares system around it. Returns the
/// high-resolution image and the solver's report.
pub fn run_reconstruction(
    fs: &FrameSet,
    cfg: &ReconstructionConfig,
) -> Result<(ImageGrid, SolveReport)> {
    cfg.validate()?;
    let (rows_h, cols_h) = scaled_dims(fs.frame_dims(), cfg.zoom);
    let a = build_stacked_operator(fs, cfg.operator, cfg.zoom)?;
    let x0 = match cfg.prior {
        Prior::AverageUpscaled => average_frames(fs, cfg.zoom)?.pack(),
        Prior::Zero => vec![0.0; rows_h * cols_h],
    };
    let b: Vec<f64> = fs.frames().iter().flat_map(|f| f.pack()).collect();
    let solve_cfg = SolveConfig {
        lambda: cfg.lambda,
        ..cfg.solver
    };
    let (x, report) = reconstruct(&a, &b, &x0, &solve_cfg)?;
    Ok((ImageGrid::new(rows_h, cols_h, x)?, report))
}

impl fmt::Display for Prior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prior::AverageUpscaled => write!(f, "average"),
            Prior::Zero => write!(f, "zero"),
        }
    }
}

/// Convenience for callers that track datasets on disk.
pub fn dataset_manifest_path(dir: &Path) -> PathBuf {
    dir.join("dataset.txt")
}
