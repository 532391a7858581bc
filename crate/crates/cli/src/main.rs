use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ftl_experiment::{run_experiment, Command, ConfigError, ExperimentConfig, Workers};

/// Follow-the-leader simulator and verification harness.
#[derive(Debug, Parser)]
#[command(name = "ftl", version)]
struct Cli {
    /// Experiment to run; overrides `command` in the config file.
    command: Command,
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Root seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads: a positive integer or "auto".
    #[arg(long)]
    workers: Option<Workers>,
}

fn load(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let bytes = std::fs::read(p).map_err(|e| ConfigError::Read(format!("{}: {e}", p.display())))?;
            ExperimentConfig::parse(&bytes)?
        }
        None => ExperimentConfig::default(),
    };
    cfg.command = Some(cli.command);
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    match run_experiment(&cfg) {
        Ok(m) => {
            eprintln!("{} finished; results in {}", m.command, cfg.out_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("runtime failure: {e}");
            ExitCode::from(3)
        }
    }
}
