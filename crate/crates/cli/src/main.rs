//! `srs`: noise budget, Monte Carlo and scan emulation of a balanced
//! stimulated Raman lock-in channel.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use srs_core::timesim::NoiseSources;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "srs", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON configuration; omitted keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `sim.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for report.txt and CSV files.
    #[arg(long, global = true, default_value = "srs-out")]
    out: PathBuf,
    /// Disables every noise source in simulations.
    #[arg(long, global = true)]
    no_noise: bool,
    /// Prints the fully defaulted configuration as JSON and exits.
    #[arg(long, global = true)]
    print_effective_config: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Frequency-resolved noise budget and design figures.
    Budget,
    /// Monte Carlo run of the channel, compared with the budget.
    Simulate,
    /// Stokes wavelength scan of the configured sample.
    Scan,
    /// Design figures over a range of one parameter.
    Sweep,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Invariant(String),
    #[error("{0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<srs_core::Error> for CliError {
    fn from(e: srs_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Invariant(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("SRS_SIM_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("SRS_SIM_THREADS must be a count, got {raw:?}")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot size the worker pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    configure_threads()?;
    let mut cfg = config::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.sim.seed = seed;
    }
    if cli.no_noise {
        cfg.sim.noise = NoiseSources::NONE;
    }
    let resolved = cfg.resolve()?;
    if cli.print_effective_config {
        let text = serde_json::to_string_pretty(&cfg).expect("config serializes");
        emit(&(text + "\n"))?;
        return Ok(());
    }
    std::fs::create_dir_all(&cli.out)?;
    let body = match cli.command {
        Command::Budget => commands::budget(&cfg, &resolved, &cli.out)?,
        Command::Simulate => commands::simulate(&cfg, &resolved, &cli.out)?,
        Command::Scan => commands::scan(&cfg, &resolved, &cli.out)?,
        Command::Sweep => commands::sweep(&cfg, &resolved, &cli.out)?,
    };
    let report = header(cli, &cfg) + &body;
    std::fs::write(cli.out.join("report.txt"), &report)?;
    emit(&report)
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> Result<(), CliError> {
    use std::io::Write as _;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn header(cli: &Cli, cfg: &config::RunConfig) -> String {
    let mut s = String::new();
    let name = format!("{:?}", cli.command).to_lowercase();
    let _ = writeln!(s, "srs {name}");
    let source = cli.config.as_deref().map_or("(defaults)".to_string(), |p: &Path| p.display().to_string());
    let _ = writeln!(s, "config: {source}");
    let _ = writeln!(s, "seed: {}", cfg.sim.seed);
    let _ = writeln!(s);
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("srs: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
