//! `magnon`: batch front-end for the magnon-core toolkit.
//!
//! Settings come from command-line flags, then the `--config` file, then
//! built-in defaults, in that order of precedence. Exit status is 0 on
//! success, 1 for invalid input and 2 for numerical failures; diagnostics
//! go to stderr as lines starting with `error:`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use magnon_cli::commands::{self, Overrides};
use magnon_cli::config::RunConfig;
use magnon_cli::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "magnon", version, about = "Cavity magnonics simulation and fitting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a transmission map from [system] and [sweep].
    Simulate(Common),
    /// Fit avoided crossings in a map (--input) using [system] and [fit].
    Fit(Common),
    /// Solve dielectric sphere modes from [sphere].
    Modes(Common),
    /// Extract the permittivity that places a sphere mode at a measured frequency.
    Epsilon {
        #[command(flatten)]
        common: Common,
        /// Measured frequency, Hz (overrides sphere.f_meas_hz).
        #[arg(long = "f-meas-hz")]
        f_meas_hz: Option<f64>,
    },
    /// Fit Fano lineshapes to every trace of a CSV `trace,f_hz,value` (--input).
    Fano(Common),
    /// Tabulate cooperativity, g/omega and effective susceptibility.
    Report(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (overrides io.output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Input file (overrides io.input).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Noise seed (overrides sweep.seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    threads: Option<usize>,
}

fn run(cli: Cli) -> Result<String, CliError> {
    let (common, f_meas_hz) = match &cli.command {
        Command::Epsilon { common, f_meas_hz } => (common, *f_meas_hz),
        Command::Simulate(c) | Command::Fit(c) | Command::Modes(c) | Command::Fano(c) | Command::Report(c) => (c, None),
    };
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(CliError::Validation("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(format!("--threads: {e}")))?;
    }
    let cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let ov = Overrides { out: common.out.clone(), input: common.input.clone(), seed: common.seed, f_meas_hz };
    match cli.command {
        Command::Simulate(_) => commands::simulate(&cfg, &ov),
        Command::Fit(_) => commands::fit(&cfg, &ov),
        Command::Modes(_) => commands::modes(&cfg, &ov),
        Command::Epsilon { .. } => commands::epsilon(&cfg, &ov),
        Command::Fano(_) => commands::fano(&cfg, &ov),
        Command::Report(_) => commands::report(&cfg, &ov),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
