//! `radamp` command-line front end.
//!
//! Exit codes: 0 success, 1 validation failure (a tolerance was breached or a
//! computation failed to converge), 2 usage error (bad flags or parameters
//! outside the domain of the requested operation), 3 I/O or file-format error.

// `!(x > 0.0)` is used on purpose so that NaN fails every domain check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "radamp", version, about = "Localised planar patterns, radial amplitude equations and Bessel identities")]
struct Cli {
    /// JSON config file; command-line flags take precedence over its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (created if missing; default: current directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomised checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the convolutional Bessel identity catalogue; writes identities.csv.
    VerifyIdentities(commands::VerifyArgs),
    /// Closed-form envelopes, Maxwell points and sweeps; writes profile.csv, summary.json, sweep.csv.
    Amplitude(commands::AmplitudeArgs),
    /// Synthesize a localised pattern; writes a field binary and its JSON sidecar.
    Synth(commands::SynthArgs),
    /// Swift–Hohenberg residuals, ε-scaling fits and dispersion checks.
    Validate(commands::ValidateArgs),
    /// Time-step a field under the Swift–Hohenberg equation.
    Simulate(commands::SimulateArgs),
    /// Reaction–diffusion amplitude coefficients; writes coefficients.json and profile.csv.
    Rd(commands::RdArgs),
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Validation(String),
    Io(String),
    Format(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io(_) | CliError::Format(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Validation(m) => write!(f, "validation failed: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Format(m) => write!(f, "format error: {m}"),
        }
    }
}

impl From<radamp::Error> for CliError {
    fn from(e: radamp::Error) -> Self {
        use radamp::Error as E;
        let msg = e.to_string();
        match e {
            E::Io(_) => CliError::Io(msg),
            E::Format(m) => CliError::Format(m),
            E::NonConvergence { .. } | E::BlowUp { .. } | E::Truncation { .. } | E::FitRejected(_) => {
                CliError::Validation(msg)
            }
            _ => CliError::Usage(msg),
        }
    }
}

/// Settings shared by every command.
pub struct Context {
    pub out: PathBuf,
    pub seed: u64,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => config::load(p)?,
        None => Default::default(),
    };
    let out = match (cli.out, cfg.remove("out")) {
        (Some(o), _) => o,
        (None, Some(serde_json::Value::String(s))) => PathBuf::from(s),
        (None, Some(_)) => return Err(CliError::Usage("config key 'out' must be a string".into())),
        (None, None) => PathBuf::from("."),
    };
    let seed = match (cli.seed, cfg.remove("seed")) {
        (Some(s), _) => s,
        (None, Some(v)) => v.as_u64().ok_or_else(|| CliError::Usage("config key 'seed' must be a non-negative integer".into()))?,
        (None, None) => 0,
    };
    std::fs::create_dir_all(&out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    let ctx = Context { out, seed };
    let known = ["verify-identities", "amplitude", "synth", "validate", "simulate", "rd"];
    if let Some(k) = cfg.keys().find(|k| !known.contains(&k.as_str())) {
        return Err(CliError::Usage(format!("unknown config key '{k}'")));
    }
    let section = |name: &str| cfg.get(name);
    match cli.command {
        Command::VerifyIdentities(a) => commands::verify(config::merge(a, section("verify-identities"), "verify-identities")?, &ctx),
        Command::Amplitude(a) => commands::amplitude(config::merge(a, section("amplitude"), "amplitude")?, &ctx),
        Command::Synth(a) => commands::synth(config::merge(a, section("synth"), "synth")?, &ctx),
        Command::Validate(a) => commands::validate(config::merge(a, section("validate"), "validate")?, &ctx),
        Command::Simulate(a) => commands::simulate(config::merge(a, section("simulate"), "simulate")?, &ctx),
        Command::Rd(a) => commands::rd(config::merge(a, section("rd"), "rd")?, &ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("radamp: {e}");
            ExitCode::from(e.code())
        }
    }
}
