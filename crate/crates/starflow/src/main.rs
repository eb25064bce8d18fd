use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use starflow::{parse_config, run_experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "starflow", version, about = "Convection-diffusion experiments on star graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset and print one PASS/FAIL line per checked criterion.
    Run {
        /// Configuration file of `key = value` lines.
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// Override applied after the file, e.g. `--set q=2.5`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(config: Option<PathBuf>, preset: Option<String>, set: Vec<String>, out: Option<PathBuf>) -> Result<ExperimentConfig, String> {
    let mut cfg = match config {
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(preset) = preset {
        cfg.apply_override(&format!("preset={preset}")).map_err(|e| e.message)?;
    }
    for entry in &set {
        cfg.apply_override(entry).map_err(|e| format!("--set {entry}: {}", e.message))?;
    }
    if let Some(out) = out {
        cfg.output_dir = out;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Run { config, preset, set, out } = cli.command;
    let cfg = match load(config, preset, set, out) {
        Ok(cfg) => cfg,
        Err(message) => {
            eprintln!("configuration error: {message}");
            return ExitCode::from(2);
        }
    };
    match run_experiment(&cfg) {
        Ok(report) => {
            for outcome in &report.outcomes {
                println!("{outcome}");
            }
            if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
