//! Run manifest and the CSV / JSON writers.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, Format, SweepAxis, Task};
use crate::error::CliError;
use crate::tasks::Cell;

pub const SCHEMA: u32 = 1;

/// Everything needed to reproduce an output file. Timing lives in a
/// separate run record so that data files stay byte-identical.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub schema: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub config_hash: String,
    pub task: Task,
    pub points: usize,
    pub failed: usize,
    pub sweep: Vec<SweepAxis>,
    pub derived: Value,
    pub metadata: Value,
}

/// SHA-256 of the config's canonical JSON (keys sorted, defaults filled).
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let canonical = crate::config::to_value(cfg).to_string();
    Sha256::digest(canonical.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Assembled output table.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

pub fn render_csv(manifest: &RunManifest, table: &Table) -> Vec<u8> {
    let mut out = Vec::new();
    let header = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    for line in header.lines() {
        out.extend_from_slice(b"# ");
        out.extend_from_slice(line.as_bytes());
        out.push(b'\n');
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.columns).expect("in-memory write");
    for row in &table.rows {
        w.write_record(row.iter().map(|c| c.to_string())).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn render_json(manifest: &RunManifest, table: &Table, extras: &[Value]) -> Vec<u8> {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|r| {
            Value::Object(
                table
                    .columns
                    .iter()
                    .cloned()
                    .zip(r.iter().map(|c| serde_json::to_value(c).unwrap_or(Value::Null)))
                    .collect(),
            )
        })
        .collect();
    let mut doc = json!({
        "schema": SCHEMA,
        "manifest": manifest,
        "columns": table.columns,
        "rows": rows,
    });
    if !extras.is_empty() {
        doc["points"] = Value::Array(extras.to_vec());
    }
    let mut bytes = serde_json::to_vec_pretty(&doc).expect("output serializes");
    bytes.push(b'\n');
    bytes
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_stem().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

/// Writes the data file, the per-point JSON records (if any) and the run
/// record. Returns the data file path.
pub fn write_outputs(
    path: &Path,
    format: Format,
    manifest: &RunManifest,
    table: &Table,
    extras: &[Value],
    run_record: &Value,
) -> Result<PathBuf, CliError> {
    match format {
        Format::Csv => {
            write(path, &render_csv(manifest, table))?;
            if !extras.is_empty() {
                let doc = json!({ "schema": SCHEMA, "config_hash": manifest.config_hash, "points": extras });
                let mut bytes = serde_json::to_vec_pretty(&doc).expect("records serialize");
                bytes.push(b'\n');
                write(&sibling(path, ".points.json"), &bytes)?;
            }
        }
        Format::Json => write(path, &render_json(manifest, table, extras))?,
    }
    let mut bytes = serde_json::to_vec_pretty(run_record).expect("run record serializes");
    bytes.push(b'\n');
    write(&sibling(path, ".run.json"), &bytes)?;
    Ok(path.to_path_buf())
}
