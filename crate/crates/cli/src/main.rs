//! Command-line front end for the super-resolution library.
//!
//! `superres reconstruct` fuses a dataset directory into one high-resolution
//! PGM image; `superres synth` renders a synthetic dataset from a
//! ground-truth image for testing and benchmarking.
//!
//! Exit codes: 0 success, 1 usage error, 2 bad input data, 3 numerical
//! failure.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use superres_core::error::Error;
use superres_core::operator::OperatorKind;
use superres_core::pgm;
use superres_core::pipeline::{
    build_stacked_operator, generate_synthetic, load_dataset, run_reconstruction, save_dataset,
    Prior, ReconstructionConfig,
};
use superres_core::solver::{SolveConfig, SolveMethod};

#[derive(Parser)]
#[command(name = "superres", version, about = "Multi-frame super-resolution reconstruction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reconstruct a high-resolution image from a dataset directory.
    Reconstruct(ReconstructArgs),
    /// Render a synthetic low-resolution dataset from a ground-truth image.
    Synth(SynthArgs),
}

#[derive(clap::Args)]
struct ReconstructArgs {
    /// Dataset directory containing dataset.txt
    #[arg(long)]
    input: PathBuf,
    /// Zoom factor between the frames and the reconstruction (> 1)
    #[arg(long)]
    zoom: f64,
    /// Damping weight
    #[arg(long, default_value_t = 0.05)]
    lambda: f64,
    /// Interpolation operator
    #[arg(long, value_enum, default_value_t = OperatorArg::Polygon)]
    operator: OperatorArg,
    /// Least-squares solver
    #[arg(long, value_enum, default_value_t = SolverArg::Cg)]
    solver: SolverArg,
    /// Starting estimate
    #[arg(long, value_enum, default_value_t = PriorArg::Average)]
    prior: PriorArg,
    /// Iteration cap (default: 10x the number of unknowns)
    #[arg(long)]
    max_iter: Option<usize>,
    /// Relative convergence tolerance
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Output image (16-bit PGM)
    #[arg(long)]
    output: PathBuf,
    /// Write the stacked system matrix row by row to this file
    #[arg(long)]
    dump_sparsity: Option<PathBuf>,
    /// Write per-iteration residual norms to this CSV file
    #[arg(long)]
    residuals: Option<PathBuf>,
}

#[derive(clap::Args)]
struct SynthArgs {
    /// Ground-truth image (PGM or PNG)
    #[arg(long)]
    truth: PathBuf,
    /// Number of frames to render
    #[arg(long, default_value_t = 8)]
    frames: usize,
    /// Zoom factor between the truth and the frames (>= 1)
    #[arg(long)]
    zoom: f64,
    /// Gaussian noise standard deviation
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// RNG seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output dataset directory
    #[arg(long)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum OperatorArg {
    Bilinear,
    Polygon,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Cg,
    Lsqr,
}

#[derive(Clone, Copy, ValueEnum)]
enum PriorArg {
    Average,
    Zero,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidParameter(_) => 1,
        Error::MissingFile(_)
        | Error::MalformedHomography { .. }
        | Error::MalformedImage { .. }
        | Error::MalformedManifest(_)
        | Error::InconsistentDimensions(_)
        | Error::DimensionMismatch { .. }
        | Error::EmptyFrameSet
        | Error::NonIdentityReference(_)
        | Error::Io { .. } => 2,
        Error::SingularMatrix { .. }
        | Error::DegenerateProjection { .. }
        | Error::NonConvexResult
        | Error::EmptyPolygon => 3,
    }
}

fn run_reconstruct(args: ReconstructArgs) -> Result<(), Error> {
    let fs = load_dataset(&args.input)?;
    let method = match args.solver {
        SolverArg::Cg => SolveMethod::NormalEquationsCg,
        SolverArg::Lsqr => SolveMethod::DampedLsqr,
    };
    let operator = match args.operator {
        OperatorArg::Bilinear => OperatorKind::Bilinear,
        OperatorArg::Polygon => OperatorKind::Polygon,
    };
    let (rows_h, cols_h) =
        superres_core::imaging::scaled_dims(fs.frame_dims(), args.zoom);
    let mut solver = SolveConfig::new(args.lambda, method, rows_h * cols_h);
    solver.tolerance = args.tol;
    if let Some(n) = args.max_iter {
        solver.max_iterations = n;
    }
    let cfg = ReconstructionConfig {
        zoom: args.zoom,
        lambda: args.lambda,
        operator,
        solver,
        prior: match args.prior {
            PriorArg::Average => Prior::AverageUpscaled,
            PriorArg::Zero => Prior::Zero,
        },
    };

    if let Some(path) = &args.dump_sparsity {
        let a = build_stacked_operator(&fs, operator, args.zoom)?;
        let file = File::create(path).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
        let mut w = BufWriter::new(file);
        a.write_sparsity(&mut w).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
        w.flush().map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
    }

    let (img, report) = run_reconstruction(&fs, &cfg)?;
    pgm::write_pgm16(&args.output, &img)?;

    if let Some(path) = &args.residuals {
        let file = File::create(path).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
        let mut w = BufWriter::new(file);
        let write_err = |e| Error::Io {
            path: path.clone(),
            source: e,
        };
        writeln!(w, "iteration,residual").map_err(write_err)?;
        for (i, r) in report.residual_history.iter().enumerate() {
            writeln!(w, "{i},{r}").map_err(write_err)?;
        }
        w.flush().map_err(write_err)?;
    }

    eprintln!(
        "reconstructed {}x{} image in {} iterations (converged: {})",
        img.rows(),
        img.cols(),
        report.iterations_used,
        report.converged
    );
    Ok(())
}

fn run_synth(args: SynthArgs) -> Result<(), Error> {
    let truth = pgm::read_image(&args.truth)?;
    let (fs, _) = generate_synthetic(&truth, args.frames, args.zoom, args.noise, args.seed)?;
    save_dataset(&args.output, &fs)?;
    eprintln!(
        "wrote {} frames of {}x{} to {}",
        fs.len(),
        fs.frame_dims().0,
        fs.frame_dims().1,
        args.output.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // keep clap's rendering but fold all usage problems into code 1
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    let result = match cli.command {
        Command::Reconstruct(args) => run_reconstruct(args),
        Command::Synth(args) => run_synth(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
