//! `spam-purify`: purification and verification of static SPAM errors.
//!
//! Exit codes: 0 success, 2 invalid parameters, 3 invalid input file,
//! 4 solver non-convergence (the report is still written).

mod commands;
mod config;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{CliError, Observation, RunConfig};
use report::Format;

/// Seed used when neither `--seed` nor `SPAM_PURIFY_SEED` is given.
const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Parser)]
#[command(name = "spam-purify", version, about = "Purify noisy state preparation and measurement with CNOT gates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Output format [default: table, or csv for sweep]
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of stdout
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Noise {
    /// Preparation fidelity <0|rho|0>, in (1/2, 1]
    #[arg(long, default_value_t = 0.95)]
    f: f64,
    /// Measurement noise fraction, in [0, 1/2)
    #[arg(long, default_value_t = 0.05)]
    q: f64,
    /// CNOT depolarizing fraction, in [0, 1)
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
}

#[derive(Args)]
struct Sampling {
    /// Monte Carlo trials per row; omit for closed-form and exact results only
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, env = "SPAM_PURIFY_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Per-round fidelity and success probability of state purification
    PurifyState {
        #[command(flatten)]
        noise: Noise,
        /// Number of target qubits
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        out: Output,
    },
    /// Purified noise fraction of a measurement outcome
    PurifyMeasurement {
        #[command(flatten)]
        noise: Noise,
        /// Number of target qubits
        #[arg(long, default_value_t = 3)]
        m: usize,
        /// Outcome whose element is purified
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
        k: u8,
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        out: Output,
    },
    /// Critical gate error rates for balanced SPAM noise
    Table1 {
        #[command(flatten)]
        out: Output,
    },
    /// Verification and purification of the five demonstration cases
    Cases {
        #[command(flatten)]
        out: Output,
    },
    /// Recover (1 - f, q, eps) from two-qubit outcome statistics
    ///
    /// INPUT is JSON: {"p00":..,"p01":..,"p10":..,"p11":..},
    /// {"p01":..,"p10":..,"p11":..} or {"c00":..,"c01":..,"c10":..,"c11":..,"shots":..}.
    Verify {
        input: PathBuf,
        /// Fidelity the recommended number of target qubits must reach
        #[arg(long, default_value_t = 0.999)]
        threshold: f64,
        /// Rounds in the predicted purification table
        #[arg(long, default_value_t = 10)]
        n_max: usize,
        /// Largest recommended number of target qubits
        #[arg(long, default_value_t = 1000)]
        n_cap: usize,
        /// Rescale probabilities that do not sum to 1 (rounded published data)
        #[arg(long)]
        renormalize: bool,
        /// Iteration limit of each local fit
        #[arg(long, default_value_t = 200)]
        max_iterations: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Target qubits needed to reach a fidelity threshold over (f, eps)
    Sweep {
        /// Initial fidelities (q = 1 - f)
        #[arg(long, value_delimiter = ',', default_values_t = [0.9, 0.93, 0.95, 0.97, 0.99])]
        f: Vec<f64>,
        #[arg(long, default_value_t = 0.0)]
        eps_min: f64,
        #[arg(long, default_value_t = 0.2)]
        eps_max: f64,
        #[arg(long, default_value_t = 21)]
        eps_steps: usize,
        #[arg(long, default_value_t = 0.999)]
        threshold: f64,
        #[arg(long, default_value_t = 100)]
        n_cap: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Re-run the configuration embedded in a JSON report
    Replay {
        report: PathBuf,
        #[command(flatten)]
        out: Output,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::BadInput(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::BadInput(format!("{}: {e}", path.display())))
}

fn grid(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    match steps {
        0 => Err(CliError::BadParameters("eps-steps must be at least 1".into())),
        1 => Ok(vec![lo]),
        _ => Ok((0..steps)
            .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
            .collect()),
    }
}

fn replayed_config(path: &Path) -> Result<RunConfig, CliError> {
    #[derive(serde::Deserialize)]
    struct Embedded {
        config: RunConfig,
    }
    Ok(read_json::<Embedded>(path)?.config)
}

/// Builds the run configuration and the output settings.
fn resolve(command: Command) -> Result<(RunConfig, Output, Format), CliError> {
    let (config, out, default) = match command {
        Command::PurifyState {
            noise,
            n,
            sampling,
            out,
        } => (
            RunConfig::PurifyState {
                f: noise.f,
                q: noise.q,
                eps: noise.eps,
                n,
                trials: sampling.trials,
                seed: sampling.seed,
            },
            out,
            Format::Table,
        ),
        Command::PurifyMeasurement {
            noise,
            m,
            k,
            sampling,
            out,
        } => (
            RunConfig::PurifyMeasurement {
                f: noise.f,
                q: noise.q,
                eps: noise.eps,
                m,
                k: k as usize,
                trials: sampling.trials,
                seed: sampling.seed,
            },
            out,
            Format::Table,
        ),
        Command::Table1 { out } => (RunConfig::Table1, out, Format::Table),
        Command::Cases { out } => (RunConfig::Cases, out, Format::Table),
        Command::Verify {
            input,
            threshold,
            n_max,
            n_cap,
            renormalize,
            max_iterations,
            out,
        } => (
            RunConfig::Verify {
                observation: read_json::<Observation>(&input)?,
                renormalize,
                threshold,
                n_max,
                n_cap,
                max_iterations,
            },
            out,
            Format::Table,
        ),
        Command::Sweep {
            f,
            eps_min,
            eps_max,
            eps_steps,
            threshold,
            n_cap,
            out,
        } => (
            RunConfig::Sweep {
                f,
                eps: grid(eps_min, eps_max, eps_steps)?,
                threshold,
                n_cap,
            },
            out,
            Format::Csv,
        ),
        Command::Replay { report, out } => {
            let config = replayed_config(&report)?;
            let default = if matches!(config, RunConfig::Sweep { .. }) {
                Format::Csv
            } else {
                Format::Table
            };
            (config, out, default)
        }
    };
    let format = out.format.unwrap_or(default);
    Ok((config, out, format))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (config, out, format) = resolve(cli.command)?;
    let (report, failure) = commands::execute(&config)?;
    let text = report.render(format);
    match &out.output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
