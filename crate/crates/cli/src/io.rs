//! Output plumbing: atomic file writes, CSV formatting, run manifests.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// Shortest round-trip decimal form of a float (17 significant digits max),
/// so exported values re-parse bit-for-bit.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// Writes through a temp file in the same directory, then renames.
pub fn write_atomic(path: &Path, content: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    {
        let mut f = std::fs::File::create(&tmp)
            .with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(content)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Comma-separated line, LF-terminated, floats in shortest round-trip form.
pub fn csv_row(fields: &[f64]) -> String {
    let mut line = fields
        .iter()
        .map(|&x| fmt_f64(x))
        .collect::<Vec<_>>()
        .join(",");
    line.push('\n');
    line
}

pub fn csv_header(labels: &[String]) -> String {
    let mut line = labels.join(",");
    line.push('\n');
    line
}

/// Reproducibility sidecar written next to every file output.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub args: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub exit_status: i32,
    pub partial: bool,
    pub timestamp_unix_ms: u128,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            schema_version: 1,
            command: command.into(),
            args: BTreeMap::new(),
            outputs: Vec::new(),
            exit_status: 0,
            partial: false,
            timestamp_unix_ms: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_millis())
                .unwrap_or(0),
        }
    }

    pub fn arg(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.args.insert(key.into(), value.to_string());
        self
    }

    pub fn output(&mut self, path: &Path) -> &mut Self {
        self.outputs.push(path.display().to_string());
        self
    }

    /// Writes `<out>.manifest.json` next to the primary output.
    pub fn write_beside(&self, out: &Path) -> Result<()> {
        let path = manifest_path(out);
        let json = serde_json::to_string_pretty(self)?;
        write_atomic(&path, json.as_bytes())
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    name.push_str(".manifest.json");
    out.with_file_name(name)
}

/// Reads a numeric CSV with a header row; returns (labels, rows).
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let content = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut lines = content.lines();
    let header = lines
        .next()
        .context("CSV is empty")?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect::<Vec<_>>();
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .with_context(|| format!("line {}: bad number '{s}'", lineno + 2))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != header.len() {
            anyhow::bail!(
                "line {}: {} fields, header has {}",
                lineno + 2,
                row.len(),
                header.len()
            );
        }
        rows.push(row);
    }
    Ok((header, rows))
}
