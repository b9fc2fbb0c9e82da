//! Experiment runner: reads a JSON config, validates every sweep point up
//! front, evaluates the points on a bounded worker pool and writes an
//! order-preserving table with its manifest.

pub mod config;
pub mod error;
pub mod output;
pub mod tasks;

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;

use config::{ExperimentConfig, SweepPoint};
use error::CliError;
use output::{RunManifest, Table};
use tasks::{Cell, Resolved};

pub use config::parse;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub output: PathBuf,
    pub points: usize,
    pub failed: usize,
}

pub fn load(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text)
}

/// Applies command-line overrides.
pub fn apply_overrides(cfg: &mut ExperimentConfig, opts: &RunOptions) {
    if let (Some(seed), Some(mc)) = (opts.seed, cfg.mc.as_mut()) {
        mc.seed = seed;
    }
}

/// Expands the sweep and validates every point without computing anything.
pub fn prepare(cfg: &ExperimentConfig) -> Result<Vec<(SweepPoint, Resolved)>, CliError> {
    tasks::resolve(cfg)?;
    config::expand(cfg)?
        .into_iter()
        .map(|p| {
            let r = tasks::resolve(&p.config).map_err(|e| match e {
                CliError::Config { field, message } => CliError::Config {
                    field,
                    message: format!("{message} (sweep point {:?})", p.coords),
                },
                other => other,
            })?;
            Ok((p, r))
        })
        .collect()
}

/// Evaluates all points in input order on `workers` threads.
pub fn sweep(points: &[(SweepPoint, Resolved)], workers: Option<usize>) -> Vec<ionpa_core::Result<tasks::PointOutput>> {
    let run = || {
        points
            .par_iter()
            .map(|(p, r)| tasks::evaluate(&p.config, r))
            .collect::<Vec<_>>()
    };
    match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("worker pool")
            .install(run),
        None => run(),
    }
}

/// Runs a parsed config and writes its outputs. A run with failed points
/// still writes every row and then reports `CliError::Numerical`.
pub fn run_config(mut cfg: ExperimentConfig, opts: &RunOptions) -> Result<RunSummary, CliError> {
    let started = Instant::now();
    apply_overrides(&mut cfg, opts);
    let points = prepare(&cfg)?;
    let base = tasks::resolve(&cfg)?;

    let results = sweep(&points, opts.workers);

    let task_cols = tasks::columns(&cfg);
    let mut columns: Vec<String> = cfg.sweep.iter().map(|a| a.variable.clone()).collect();
    columns.extend(task_cols.iter().map(|c| c.to_string()));
    columns.push("status".into());
    let mut rows = Vec::new();
    let mut extras = Vec::new();
    let mut failures = Vec::new();
    for ((p, _), res) in points.iter().zip(results) {
        let coords: Vec<Cell> = p.coords.iter().map(|&x| Cell::Num(x)).collect();
        match res {
            Ok(out) => {
                for r in out.rows {
                    let mut row = coords.clone();
                    row.extend(r);
                    row.push(Cell::Text("ok".into()));
                    rows.push(row);
                }
                extras.extend(out.extra);
            }
            Err(e) => {
                let mut row = coords.clone();
                row.extend(task_cols.iter().map(|_| Cell::Text(String::new())));
                row.push(Cell::Text(format!("failed: {e}")));
                rows.push(row);
                failures.push(e.to_string());
            }
        }
    }

    let mut metadata = json!({ "branch_convention": ionpa_core::gate_designer::BRANCH_CONVENTION });
    if let Some(mc) = &cfg.mc {
        metadata["mc"] = json!(mc);
    }
    let manifest = RunManifest {
        schema: output::SCHEMA,
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config_hash: output::config_hash(&cfg),
        task: cfg.task,
        points: points.len(),
        failed: failures.len(),
        sweep: cfg.sweep.clone(),
        derived: tasks::derived(&cfg, &base),
        metadata,
    };
    let table = Table { columns, rows };
    let path = match &opts.out_dir {
        Some(dir) => dir.join(&cfg.output.path),
        None => cfg.output.path.clone(),
    };
    let run_record = json!({
        "schema": output::SCHEMA,
        "config_hash": manifest.config_hash,
        "workers": opts.workers.unwrap_or_else(rayon::current_num_threads),
        "wall_clock_s": started.elapsed().as_secs_f64(),
    });
    let output = output::write_outputs(&path, cfg.output.format, &manifest, &table, &extras, &run_record)?;
    if let Some(first) = failures.first() {
        return Err(CliError::Numerical {
            failed: failures.len(),
            total: points.len(),
            first: first.clone(),
        });
    }
    Ok(RunSummary {
        output,
        points: points.len(),
        failed: 0,
    })
}

pub fn run(config_path: &Path, opts: &RunOptions) -> Result<RunSummary, CliError> {
    run_config(load(config_path)?, opts)
}
