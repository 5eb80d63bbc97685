//! Experiment report serialization: deterministic JSON plus CSV side
//! files, written atomically (temp file, then rename).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{ensure, Context, Result};
use serde::Serialize;

/// Structured scenario result. Ordered maps keep the byte output
/// deterministic for a given config and seed; wall time is reported on
/// stdout only so reruns stay byte-identical.
#[derive(Debug, Serialize)]
pub struct ExperimentReport {
    pub scenario: String,
    pub metrics: BTreeMap<String, f64>,
    pub pass: BTreeMap<String, bool>,
}

impl ExperimentReport {
    pub fn new(scenario: &str) -> Self {
        Self {
            scenario: scenario.to_string(),
            metrics: BTreeMap::new(),
            pass: BTreeMap::new(),
        }
    }

    pub fn metric(&mut self, key: &str, value: f64) {
        self.metrics.insert(key.to_string(), value);
    }

    pub fn flag(&mut self, key: &str, ok: bool) {
        self.pass.insert(key.to_string(), ok);
    }

    pub fn all_pass(&self) -> bool {
        self.pass.values().all(|&ok| ok)
    }
}

/// A CSV side file: header plus rows of already-formatted cells.
#[derive(Debug)]
pub struct CsvFile {
    pub suffix: String,
    pub header: String,
    pub rows: Vec<String>,
}

impl CsvFile {
    pub fn new(suffix: &str, header: &str) -> Self {
        Self {
            suffix: suffix.to_string(),
            header: header.to_string(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: &[CsvCell]) {
        let formatted: Vec<String> = cells.iter().map(CsvCell::format).collect();
        self.rows.push(formatted.join(","));
    }

    fn contents(&self) -> String {
        let mut out = String::with_capacity(16 * self.rows.len() + self.header.len() + 1);
        out.push_str(&self.header);
        out.push('\n');
        for row in &self.rows {
            out.push_str(row);
            out.push('\n');
        }
        out
    }
}

pub enum CsvCell {
    Text(String),
    Int(i64),
    /// Floats print with 17 significant digits so reruns are byte-stable.
    Real(f64),
}

impl CsvCell {
    fn format(&self) -> String {
        match self {
            CsvCell::Text(s) => s.clone(),
            CsvCell::Int(i) => i.to_string(),
            CsvCell::Real(x) => format!("{x:.16e}"),
        }
    }
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

fn side_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned());
    let stem = stem.unwrap_or_else(|| "report".to_string());
    out.with_file_name(format!("{stem}_{suffix}.csv"))
}

/// Write the JSON report and its CSV side files. Every metric must be
/// finite; nothing is written when that fails.
pub fn emit(report: &ExperimentReport, csvs: &[CsvFile], out: &Path) -> Result<()> {
    for (key, value) in &report.metrics {
        ensure!(value.is_finite(), "metric {key} is not finite ({value})");
    }
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    write_atomic(out, &json)?;
    for csv in csvs {
        write_atomic(&side_path(out, &csv.suffix), &csv.contents())?;
    }
    Ok(())
}
