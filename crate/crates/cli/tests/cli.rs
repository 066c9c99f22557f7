//! End-to-end tests of the `superres` binary: the synth/reconstruct round
//! trip, determinism of both subcommands, diagnostic outputs, and the exit
//! code contract (0 ok, 1 usage, 2 data, 3 numerical).

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use superres_core::imaging::ImageGrid;
use superres_core::pgm::{read_pgm, write_pgm16};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_superres"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary should spawn")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no exit code (killed by signal?)")
}

/// 64x64 ground truth with smooth content fading to black at the border.
fn write_truth(path: &Path) {
    let n = 64usize;
    let data: Vec<f64> = (0..n * n)
        .map(|k| {
            let (i, j) = ((k / n) as f64, (k % n) as f64);
            let edge = i.min(63.0 - i).min(j).min(63.0 - j).min(8.0) / 8.0;
            let w = 0.5 - 0.5 * (std::f64::consts::PI * edge).cos();
            w * (0.5 + 0.3 * (i / 9.0).sin() * (j / 7.0).cos())
        })
        .collect();
    let img = ImageGrid::new(n, n, data).unwrap();
    write_pgm16(path, &img).unwrap();
}

fn synth_dataset(dir: &Path, seed: &str) -> PathBuf {
    let truth = dir.join("truth.pgm");
    write_truth(&truth);
    let out = dir.join(format!("dataset_{seed}"));
    let result = run(&[
        "synth",
        "--truth",
        truth.to_str().unwrap(),
        "--frames",
        "4",
        "--zoom",
        "2.0",
        "--noise",
        "0.01",
        "--seed",
        seed,
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&result), 0, "synth failed: {result:?}");
    out
}

#[test]
fn synth_then_reconstruct_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = synth_dataset(dir.path(), "5");
    assert!(dataset.join("dataset.txt").exists());
    assert!(dataset.join("frame_000.pgm").exists());
    assert!(dataset.join("hom_003.txt").exists());

    let output = dir.path().join("result.pgm");
    let residuals = dir.path().join("residuals.csv");
    let sparsity = dir.path().join("sparsity.txt");
    let result = run(&[
        "reconstruct",
        "--input",
        dataset.to_str().unwrap(),
        "--zoom",
        "2.0",
        "--lambda",
        "0.05",
        "--output",
        output.to_str().unwrap(),
        "--residuals",
        residuals.to_str().unwrap(),
        "--dump-sparsity",
        sparsity.to_str().unwrap(),
    ]);
    assert_eq!(code(&result), 0, "reconstruct failed: {result:?}");

    let img = read_pgm(&output).unwrap();
    assert_eq!(img.dims(), (64, 64));

    let csv = std::fs::read_to_string(&residuals).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("iteration,residual"));
    let first = lines.next().expect("at least the starting residual");
    assert!(first.starts_with("0,"), "unexpected first row {first:?}");

    let sparsity_text = std::fs::read_to_string(&sparsity).unwrap();
    assert!(!sparsity_text.is_empty());
}

#[test]
fn synth_is_deterministic_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = synth_dataset(dir.path(), "9");
    let b_root = tempfile::tempdir().unwrap();
    let b = synth_dataset(b_root.path(), "9");
    for name in [
        "dataset.txt",
        "frame_000.pgm",
        "frame_003.pgm",
        "hom_000.txt",
        "hom_003.txt",
    ] {
        let bytes_a = std::fs::read(a.join(name)).unwrap();
        let bytes_b = std::fs::read(b.join(name)).unwrap();
        assert!(bytes_a == bytes_b, "{name} differs between runs");
    }
}

#[test]
fn reconstruct_is_deterministic_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = synth_dataset(dir.path(), "11");
    let mut bytes = Vec::new();
    for run_idx in 0..2 {
        let output = dir.path().join(format!("out_{run_idx}.pgm"));
        let result = run(&[
            "reconstruct",
            "--input",
            dataset.to_str().unwrap(),
            "--zoom",
            "2.0",
            "--solver",
            "lsqr",
            "--output",
            output.to_str().unwrap(),
        ]);
        assert_eq!(code(&result), 0, "reconstruct failed: {result:?}");
        bytes.push(std::fs::read(&output).unwrap());
    }
    assert!(bytes[0] == bytes[1], "outputs differ between identical runs");
}

#[test]
fn usage_errors_exit_with_1() {
    let out = run(&["reconstruct", "--no-such-flag"]);
    assert_eq!(code(&out), 1);

    let out = run(&["reconstruct", "--zoom", "2.0", "--output", "x.pgm"]);
    assert_eq!(code(&out), 1, "missing --input should be a usage error");

    // parses fine, but the parameter itself is invalid
    let dir = tempfile::tempdir().unwrap();
    let dataset = synth_dataset(dir.path(), "3");
    let out = run(&[
        "reconstruct",
        "--input",
        dataset.to_str().unwrap(),
        "--zoom",
        "0.5",
        "--output",
        dir.path().join("o.pgm").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1, "zoom <= 1 should be a usage error: {out:?}");
}

#[test]
fn data_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "reconstruct",
        "--input",
        dir.path().join("missing").to_str().unwrap(),
        "--zoom",
        "2.0",
        "--output",
        dir.path().join("o.pgm").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2, "missing dataset should be a data error");

    let bad = dir.path().join("bad");
    std::fs::create_dir(&bad).unwrap();
    std::fs::write(bad.join("dataset.txt"), "f.pgm h.txt\n").unwrap();
    std::fs::write(bad.join("f.pgm"), "P2\n2 2\n255\n0 0 0 0\n").unwrap();
    std::fs::write(bad.join("h.txt"), "1 0 0 0 1 0 0 0\n").unwrap(); // 8 values
    let out = run(&[
        "reconstruct",
        "--input",
        bad.to_str().unwrap(),
        "--zoom",
        "2.0",
        "--output",
        dir.path().join("o.pgm").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2, "malformed homography should be a data error");
}

#[test]
fn numerical_failures_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("singular");
    std::fs::create_dir(&bad).unwrap();
    std::fs::write(bad.join("dataset.txt"), "f.pgm h.txt\n").unwrap();
    std::fs::write(bad.join("f.pgm"), "P2\n2 2\n255\n0 0 0 0\n").unwrap();
    // well-formed file, rank-deficient matrix
    std::fs::write(bad.join("h.txt"), "1 0 0 2 0 0 0 0 1\n").unwrap();
    let out = run(&[
        "reconstruct",
        "--input",
        bad.to_str().unwrap(),
        "--zoom",
        "2.0",
        "--output",
        dir.path().join("o.pgm").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3, "singular homography should be a numerical failure");
}

#[test]
fn help_and_version_exit_cleanly() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
    assert_eq!(code(&run(&["reconstruct", "--help"])), 0);
}
