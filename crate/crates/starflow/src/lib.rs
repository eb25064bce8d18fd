//! Experiment runner for `starflow-core`: configuration files, presets that
//! reproduce the acceptance checks, and CSV output.

pub mod config;
pub mod experiments;
pub mod io;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

pub use config::{parse_config, ConfigError, ExperimentConfig, Preset};
pub use experiments::{Outcome, Report};

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

/// Writes the manifest and exported snapshots of every run plus the
/// analysis tables into `dir`, returning the paths written.
pub fn write_report(report: &Report, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    for run in &report.runs {
        let path = dir.join(format!("{}_manifest.csv", run.name));
        io::write_manifest(create(&path)?, &run.snapshots, &run.junction_residuals)?;
        written.push(path);
        for &i in &run.export {
            let path = dir.join(format!("{}_snapshot_{i:04}.csv", run.name));
            io::write_field(create(&path)?, &run.snapshots[i].field)?;
            written.push(path);
        }
    }
    if !report.decay_fits.is_empty() {
        let path = dir.join("decay_fits.csv");
        io::write_decay_fits(create(&path)?, &report.decay_fits)?;
        written.push(path);
    }
    if !report.scaled_errors.is_empty() {
        let path = dir.join("scaled_errors.csv");
        io::write_scaled_errors(create(&path)?, &report.scaled_errors)?;
        written.push(path);
    }
    let path = dir.join("violations.csv");
    io::write_violations(create(&path)?, &report.violations)?;
    written.push(path);
    Ok(written)
}

/// Runs the preset, writes its outputs under `cfg.output_dir` and returns
/// the report; the caller decides how to print the outcomes.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    let report = experiments::run_preset(cfg)?;
    write_report(&report, &cfg.output_dir)?;
    Ok(report)
}
