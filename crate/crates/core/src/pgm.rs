//! Grayscale image file I/O.
//!
//! Reads PGM (both ASCII `P2` and binary `P5`, any maxval up to 65535) and
//! 8-bit PNG; color PNG input is converted to luma. Writes 16-bit binary
//! PGM, the working output format: samples are clamped to [0, 1] only here,
//! at the export boundary, and scaled to the full 16-bit range.

use std::path::Path;

use crate::error::{Error, Result};
use crate::imaging::ImageGrid;

/// Reads a grayscale image by extension: `.pgm`/`.pnm` via the PGM codec,
/// `.png` via the PNG decoder. Samples are normalized to [0, 1].
pub fn read_image(path: &Path) -> Result<ImageGrid> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    match ext.as_str() {
        "pgm" | "pnm" => read_pgm(path),
        "png" => read_png(path),
        other => Err(Error::MalformedImage {
            path: path.to_path_buf(),
            reason: format!("unsupported image format '.{other}'"),
        }),
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path.to_path_buf())
        } else {
            Error::Io {
                path: path.to_path_buf(),
                source: e,
            }
        }
    })
}

fn read_png(path: &Path) -> Result<ImageGrid> {
    let img = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(io)
            if io.kind() == std::io::ErrorKind::NotFound =>
        {
            Error::MissingFile(path.to_path_buf())
        }
        other => Error::MalformedImage {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    })?;
    let luma = img.to_luma8();
    let (w, h) = (luma.width() as usize, luma.height() as usize);
    let data = luma.as_raw().iter().map(|&v| v as f64 / 255.0).collect();
    ImageGrid::new(h, w, data)
}

/// Pulls whitespace-separated header tokens, treating `#` to end-of-line as
/// a comment, and returns the offset of the byte after the last token.
fn header_tokens(bytes: &[u8], count: usize) -> Option<(Vec<String>, usize)> {
    let mut tokens = Vec::with_capacity(count);
    let mut i = 0;
    while tokens.len() < count {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i < bytes.len() && bytes[i] == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'#' {
            i += 1;
        }
        if i == start {
            return None;
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..i]).into_owned());
    }
    Some((tokens, i))
}

pub fn read_pgm(path: &Path) -> Result<ImageGrid> {
    let bytes = read_bytes(path)?;
    let malformed = |reason: String| Error::MalformedImage {
        path: path.to_path_buf(),
        reason,
    };
    let (header, header_end) = header_tokens(&bytes, 4)
        .ok_or_else(|| malformed("truncated header".into()))?;
    let magic = header[0].as_str();
    if magic != "P2" && magic != "P5" {
        return Err(malformed(format!("not a PGM file (magic '{magic}')")));
    }
    let parse_dim = |s: &str, what: &str| {
        s.parse::<usize>()
            .ok()
            .filter(|&v| v > 0)
            .ok_or_else(|| malformed(format!("bad {what} '{s}'")))
    };
    let width = parse_dim(&header[1], "width")?;
    let height = parse_dim(&header[2], "height")?;
    let maxval: u32 = header[3]
        .parse()
        .ok()
        .filter(|&v| v > 0 && v <= 65535)
        .ok_or_else(|| malformed(format!("bad maxval '{}'", header[3])))?;
    let n = width * height;
    let scale = 1.0 / maxval as f64;

    let data: Vec<f64> = if magic == "P2" {
        let text = String::from_utf8_lossy(&bytes[header_end..]);
        let mut vals = Vec::with_capacity(n);
        for tok in text.split_whitespace() {
            let v: u32 = tok
                .parse()
                .ok()
                .filter(|&v| v <= maxval)
                .ok_or_else(|| malformed(format!("bad sample '{tok}'")))?;
            vals.push(v as f64 * scale);
        }
        if vals.len() != n {
            return Err(malformed(format!(
                "expected {n} samples, found {}",
                vals.len()
            )));
        }
        vals
    } else {
        // single whitespace byte separates the header from binary samples
        let start = header_end + 1;
        let wide = maxval > 255;
        let need = if wide { 2 * n } else { n };
        if start + need > bytes.len() {
            return Err(malformed(format!(
                "expected {need} sample bytes, found {}",
                bytes.len().saturating_sub(start)
            )));
        }
        let raw = &bytes[start..start + need];
        if wide {
            raw.chunks_exact(2)
                .map(|p| u16::from_be_bytes([p[0], p[1]]) as f64 * scale)
                .collect()
        } else {
            raw.iter().map(|&v| v as f64 * scale).collect()
        }
    };
    ImageGrid::new(height, width, data)
}

/// Writes a 16-bit binary PGM (`P5`, maxval 65535, big-endian samples).
/// Values are clamped to [0, 1] and quantized by rounding half up.
pub fn write_pgm16(path: &Path, img: &ImageGrid) -> Result<()> {
    let mut out = Vec::with_capacity(32 + 2 * img.rows() * img.cols());
    out.extend_from_slice(format!("P5\n{} {}\n65535\n", img.cols(), img.rows()).as_bytes());
    for &v in img.as_slice() {
        let q = (v.clamp(0.0, 1.0) * 65535.0).round() as u16;
        out.extend_from_slice(&q.to_be_bytes());
    }
    std::fs::write(path, out).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}
