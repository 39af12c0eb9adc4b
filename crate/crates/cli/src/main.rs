//! `vpb`: run, validate and describe kinetic experiments.
//!
//! Exit codes: 0 pass, 1 run error, 2 configuration error, 3 invariant-suite failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;
use vpb_core::experiments::{emit_config, parse_config, preset, run_experiment, ExperimentConfig, PresetKind, RunOptions};
use vpb_core::VpbError;

#[derive(Debug, Error)]
enum CliError {
    #[error("configuration error: {0}")]
    Config(VpbError),
    #[error("run failed: {0}")]
    Run(VpbError),
    #[error("invariant suite failed for {0}")]
    Invariants(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Run(_) => 1,
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Invariants(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(name = "vpb", version, about = "Bipolar Vlasov-Poisson-Boltzmann experiments")]
struct Cli {
    /// Worker threads for the solver (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more experiments.
    Run {
        /// Configuration file; repeat to run a list of configurations.
        #[arg(long, required_unless_present = "preset")]
        config: Vec<PathBuf>,
        /// Run a preset with its default configuration instead of a file.
        #[arg(long, conflicts_with = "config")]
        preset: Option<String>,
        /// Output directory; each configuration gets a subdirectory when several are given.
        #[arg(long, env = "VPB_OUT_DIR", default_value = "runs")]
        out_dir: PathBuf,
        /// Write a checkpoint every this many steps.
        #[arg(long)]
        snapshot_every: Option<u64>,
    },
    /// Parse and check a configuration, then print it with every default filled in.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print a preset's description and default configuration.
    DescribePreset {
        /// Preset name; omit to list all presets.
        name: Option<String>,
    },
}

fn run_one(cfg: &ExperimentConfig, label: &str, out_dir: PathBuf, snapshot_every: Option<u64>) -> Result<(), CliError> {
    let summary = run_experiment(cfg, &RunOptions { out_dir: out_dir.clone(), snapshot_every }).map_err(|e| match e {
        VpbError::Config(_) | VpbError::Inadmissible(_) => CliError::Config(e),
        _ => CliError::Run(e),
    })?;
    for c in &summary.checks {
        println!("[{}] {label}: {} = {:.6e} (threshold {:.3e})", if c.passed { "pass" } else { "FAIL" }, c.name, c.value, c.threshold);
    }
    println!("{label}: {} steps, t = {:.6}, {:.1} s, output in {}", summary.steps, summary.t_end, summary.wall_seconds, out_dir.display());
    if summary.passed() {
        Ok(())
    } else {
        Err(CliError::Invariants(label.to_string()))
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "run".into(), |s| s.to_string_lossy().into_owned())
}

fn execute(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Run {
            config,
            preset: name,
            out_dir,
            snapshot_every,
        } => {
            if let Some(name) = name {
                let cfg = preset(PresetKind::from_name(&name).map_err(CliError::Config)?);
                return run_one(&cfg, &name, out_dir, snapshot_every);
            }
            // parse everything first so a bad file fails before any run starts
            let cfgs = config
                .iter()
                .map(|p| parse_config(p).map(|c| (stem(p), c)))
                .collect::<Result<Vec<_>, _>>()
                .map_err(CliError::Config)?;
            let many = cfgs.len() > 1;
            let mut worst: Option<CliError> = None;
            for (label, cfg) in &cfgs {
                let dir = if many { out_dir.join(label) } else { out_dir.clone() };
                if let Err(e) = run_one(cfg, label, dir, snapshot_every) {
                    eprintln!("error: {e}");
                    if worst.as_ref().map_or(true, |w| e.code() < w.code()) {
                        worst = Some(e);
                    }
                }
            }
            worst.map_or(Ok(()), Err)
        }
        Command::Validate { config } => {
            let cfg = parse_config(&config).map_err(CliError::Config)?;
            print!("{}", emit_config(&cfg).map_err(CliError::Config)?);
            Ok(())
        }
        Command::DescribePreset { name } => {
            let Some(name) = name else {
                for k in PresetKind::ALL {
                    println!("{:24} {}", k.name(), k.description());
                }
                return Ok(());
            };
            let kind = PresetKind::from_name(&name).map_err(CliError::Config)?;
            println!("# {}", kind.description());
            print!("{}", emit_config(&preset(kind)).map_err(CliError::Config)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
