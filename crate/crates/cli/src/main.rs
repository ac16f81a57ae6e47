//! `squeezer-sim`: config-driven simulator for a squeezed-vacuum source and
//! its detection/control chain.
//!
//! Exit codes: 0 success, 2 configuration or usage errors, 3 physics-domain
//! errors (nonphysical level pair, pump above threshold, ...), 1 I/O.

mod commands;
mod config;
mod report;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::Selector;
use config::{ConfigError, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Physics(squeezer_core::Error),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Physics(e) => write!(f, "physics error: {e}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<squeezer_core::Error> for CliError {
    fn from(e: squeezer_core::Error) -> Self {
        CliError::Physics(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Physics(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Doc,
}

fn parse_band(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected LO:HI, got '{s}'"))?;
    let lo: f64 = lo.parse().map_err(|e| format!("bad band lower edge: {e}"))?;
    let hi: f64 = hi.parse().map_err(|e| format!("bad band upper edge: {e}"))?;
    Ok((lo, hi))
}

fn parse_on_off(s: &str) -> Result<bool, String> {
    match s {
        "on" => Ok(true),
        "off" => Ok(false),
        other => Err(format!("expected 'on' or 'off', got '{other}'")),
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "squeezer-sim",
    version,
    about = "Simulator for a cavity-based squeezed-vacuum source: spectra, level fits, locking error signals, loop budgets and reports"
)]
struct Cli {
    /// Config file path, bare scenario name under $SQUEEZER_SIM_CONFIG_DIR,
    /// or the built-in scenario 'geo600'
    #[arg(long, global = true, default_value = "geo600")]
    config: String,

    /// Directory to write output files into; without it, output goes to stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format for traces and reports
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesize the three-trace homodyne noise spectrum (shot, squeezed, anti-squeezed)
    Spectrum {
        /// Fourier band in Hz as LO:HI
        #[arg(long, value_parser = parse_band)]
        band: Option<(f64, f64)>,
        #[arg(long)]
        points_per_decade: Option<u32>,
        /// Insert flagged synthetic mains peaks at 50/100 Hz
        #[arg(long, value_parser = parse_on_off)]
        mains: Option<bool>,
    },
    /// Fit source efficiency and strength from a squeezed/anti-squeezed dB pair
    Fit {
        /// Squeezed level in dB (negative); defaults to the config's [fit] block
        #[arg(allow_negative_numbers = true)]
        sq_db: Option<f64>,
        /// Anti-squeezed level in dB (positive)
        #[arg(allow_negative_numbers = true)]
        anti_db: Option<f64>,
        /// Remove the electronic dark-noise contribution before fitting
        #[arg(long)]
        dark_corrected: bool,
    },
    /// Sweep a locking error signal
    Errorsignal {
        #[arg(value_enum)]
        selector: Selector,
        /// Cavity block for the PDH sweep (default mc532)
        #[arg(long)]
        cavity: Option<String>,
        /// Total detuning span in Hz for PDH (default 6x FWHM)
        #[arg(long)]
        span: Option<f64>,
        #[arg(long, default_value_t = 1001)]
        points: usize,
        /// Override the demodulation harmonic (1 or 2)
        #[arg(long)]
        demod_harmonic: Option<u32>,
    },
    /// Loop suppression trace and residual phase jitter over a band
    Loop {
        /// Loop block name from the config (e.g. pump_phase, lo_phase)
        #[arg(long, default_value = "pump_phase")]
        name: String,
        #[arg(long, value_parser = parse_band)]
        band: Option<(f64, f64)>,
    },
    /// Aggregate cavity numbers, fit, budget and projections into one document
    Report,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (cfg, source) = RunConfig::resolve(&cli.config)?;
    let output = match cli.command {
        Command::Spectrum {
            band,
            points_per_decade,
            mains,
        } => commands::cmd_spectrum(&cfg, band, points_per_decade, mains, cli.format)?,
        Command::Fit {
            sq_db,
            anti_db,
            dark_corrected,
        } => commands::cmd_fit(&cfg, sq_db, anti_db, dark_corrected)?,
        Command::Errorsignal {
            selector,
            cavity,
            span,
            points,
            demod_harmonic,
        } => commands::cmd_errorsignal(
            &cfg,
            selector,
            cavity,
            span,
            points,
            demod_harmonic,
            cli.format,
        )?,
        Command::Loop { name, band } => commands::cmd_loop(&cfg, &name, band, cli.format)?,
        Command::Report => commands::cmd_report(&cfg, &source)?,
    };

    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            for artifact in &output.artifacts {
                let path = dir.join(&artifact.file_name);
                std::fs::write(&path, &artifact.content)?;
                println!("wrote {}", path.display());
            }
        }
        None => {
            // stdout carries only the primary artifact; companions (run
            // reports, companion traces) are written when --out is given
            if let Some(artifact) = output.artifacts.first() {
                print!("{}", artifact.content);
            }
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
