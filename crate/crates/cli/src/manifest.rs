//! The degradation manifest: one row per (input, seed) observation.

use std::path::{Path, PathBuf};

use pdls_core::bench::Task;
use pdls_core::Label;

use crate::error::{CliError, Result};

pub const MANIFEST_FILE: &str = "manifest.csv";

pub const HEADER: [&str; 11] = [
    "id", "task", "input", "label", "seed", "width", "height", "operator", "sigma_y", "observed", "truth",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow {
    pub id: String,
    pub task: Task,
    pub input: String,
    pub label: Label,
    pub seed: u64,
    /// Source-grid size; `(dim, 1)` for vector tasks.
    pub width: usize,
    pub height: usize,
    /// Operator descriptor that reproduces this observation, `none` for toy2d.
    pub operator: String,
    pub sigma_y: f64,
    /// Paths relative to the manifest directory.
    pub observed: String,
    pub truth: String,
}

impl ManifestRow {
    fn record(&self) -> Vec<String> {
        vec![
            self.id.clone(),
            self.task.to_string(),
            self.input.clone(),
            self.label.to_string(),
            self.seed.to_string(),
            self.width.to_string(),
            self.height.to_string(),
            self.operator.clone(),
            self.sigma_y.to_string(),
            self.observed.clone(),
            self.truth.clone(),
        ]
    }

    fn from_record(r: &csv::StringRecord) -> std::result::Result<Self, String> {
        if r.len() != HEADER.len() {
            return Err(format!("expected {} fields, got {}", HEADER.len(), r.len()));
        }
        let num = |i: usize| -> std::result::Result<u64, String> {
            r[i].parse().map_err(|_| format!("`{}` is not an integer: `{}`", HEADER[i], &r[i]))
        };
        Ok(Self {
            id: r[0].to_string(),
            task: r[1].parse().map_err(|e: pdls_core::PdlsError| e.to_string())?,
            input: r[2].to_string(),
            label: Label::new(&r[3]),
            seed: num(4)?,
            width: num(5)? as usize,
            height: num(6)? as usize,
            operator: r[7].to_string(),
            sigma_y: r[8].parse().map_err(|_| format!("bad sigma_y `{}`", &r[8]))?,
            observed: r[9].to_string(),
            truth: r[10].to_string(),
        })
    }
}

pub fn write(path: &Path, rows: &[ManifestRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::csv(path, e))?;
    w.write_record(HEADER).map_err(|e| CliError::csv(path, e))?;
    for row in rows {
        w.write_record(row.record()).map_err(|e| CliError::csv(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read(path: &Path) -> Result<Vec<ManifestRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::csv(path, e))?;
    let header = r.headers().map_err(|e| CliError::csv(path, e))?.clone();
    if header.iter().ne(HEADER) {
        return Err(CliError::malformed(path, "unexpected manifest header"));
    }
    let mut rows = Vec::new();
    for (n, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::csv(path, e))?;
        rows.push(ManifestRow::from_record(&rec).map_err(|e| CliError::malformed(path, format!("row {}: {e}", n + 1)))?);
    }
    if rows.is_empty() {
        return Err(CliError::malformed(path, "manifest has no rows"));
    }
    Ok(rows)
}

/// Resolves a manifest-relative path.
pub fn resolve(manifest: &Path, relative: &str) -> PathBuf {
    manifest.parent().unwrap_or(Path::new(".")).join(relative)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(MANIFEST_FILE);
        let rows = vec![ManifestRow {
            id: "disk_00_s1".into(),
            task: Task::Inpaint,
            input: "disk_00".into(),
            label: Label::new("disk"),
            seed: 1,
            width: 32,
            height: 32,
            operator: "inpaint:seed=1".into(),
            sigma_y: 0.01,
            observed: "observed/disk_00_s1.pgm".into(),
            truth: "truth/disk_00_s1.pgm".into(),
        }];
        write(&path, &rows).unwrap();
        assert_eq!(read(&path).unwrap(), rows);
        assert_eq!(resolve(&path, "a/b.pgm"), dir.path().join("a/b.pgm"));
    }
}
