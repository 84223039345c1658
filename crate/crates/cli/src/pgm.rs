//! Binary graymap (`P5`) images and CSV point sets.

use std::fs;
use std::io::Write;
use std::path::Path;

use pdls_core::degrade::ImageGrid;
use thiserror::Error;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PgmError {
    #[error("malformed header at byte {offset}: {reason}")]
    Header { offset: usize, reason: String },

    #[error("truncated pixel data at byte {offset}: expected {expected} bytes, found {found}")]
    Truncated {
        offset: usize,
        expected: usize,
        found: usize,
    },

    #[error("invalid image: {0}")]
    Invalid(String),
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn fail(&self, reason: impl Into<String>) -> PgmError {
        PgmError::Header {
            offset: self.pos,
            reason: reason.into(),
        }
    }

    fn skip_space(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> std::result::Result<usize, PgmError> {
        self.skip_space();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.fail(format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| PgmError::Header {
                offset: start,
                reason: format!("{what} out of range"),
            })
    }
}

/// Parses a `P5` graymap; samples are divided by maxval.
pub fn decode(bytes: &[u8]) -> std::result::Result<ImageGrid, PgmError> {
    let mut h = Header { bytes, pos: 0 };
    if !bytes.starts_with(b"P5") {
        return Err(h.fail("missing `P5` magic"));
    }
    h.pos = 2;
    let width = h.number("width")?;
    let height = h.number("height")?;
    let maxval = h.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(h.fail("zero image dimension"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(h.fail("maxval must be in 1..=65535"));
    }
    match bytes.get(h.pos) {
        Some(b) if b.is_ascii_whitespace() => h.pos += 1,
        _ => return Err(h.fail("expected whitespace before pixel data")),
    }
    let sample = if maxval < 256 { 1 } else { 2 };
    let expected = width * height * sample;
    let data = &bytes[h.pos..];
    if data.len() < expected {
        return Err(PgmError::Truncated {
            offset: h.pos,
            expected,
            found: data.len(),
        });
    }
    let scale = maxval as f64;
    let pixels = (0..width * height)
        .map(|i| {
            let v = if sample == 1 {
                data[i] as usize
            } else {
                (data[2 * i] as usize) << 8 | data[2 * i + 1] as usize
            };
            (v.min(maxval)) as f64 / scale
        })
        .collect();
    ImageGrid::new(width, height, pixels).map_err(|e| PgmError::Invalid(e.to_string()))
}

/// 8-bit `P5` encoding; pixels are clipped to `[0, 1]` and rounded.
pub fn encode(image: &ImageGrid) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend(image.pixels().iter().map(|p| (p.clamp(0.0, 1.0) * 255.0).round() as u8));
    out
}

pub fn read_image(path: &Path) -> Result<ImageGrid> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    decode(&bytes).map_err(|source| CliError::Image {
        path: path.to_owned(),
        source,
    })
}

pub fn write_image(path: &Path, image: &ImageGrid) -> Result<()> {
    fs::write(path, encode(image)).map_err(|e| CliError::io(path, e))
}

/// One point per row, no header.
pub fn read_points(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::csv(path, e))?;
    let mut points = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::csv(path, e))?;
        let point = record
            .iter()
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| CliError::malformed(path, format!("row {}: {e}", row + 1)))?;
        points.push(point);
    }
    Ok(points)
}

pub fn write_points(path: &Path, points: &[Vec<f64>]) -> Result<()> {
    let mut text = String::new();
    for p in points {
        let row: Vec<String> = p.iter().map(f64::to_string).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    let mut file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    file.write_all(text.as_bytes()).map_err(|e| CliError::io(path, e))
}
