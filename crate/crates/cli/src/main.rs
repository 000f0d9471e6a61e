//! `rio`: verification campaigns, gate checks, fidelity sweeps and timing
//! reports for remote two-qubit operations.

mod commands;
mod config;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Output;
use crate::config::{Format, RunConfig};

#[derive(Debug)]
pub enum CliError {
    /// Exit status 2.
    Config(String),
    /// Exit status 1: the computation itself failed.
    Runtime(String),
}

#[derive(Parser, Debug)]
#[command(name = "rio", version, about = "Remote implementation of partially unknown two-qubit operations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Run the protocol for all 24 operators, 16 branches and random inputs.
    VerifyProtocol,
    /// Check the published recovery circuits against R2(x).
    VerifyDecompositions,
    /// Compare the composed physical CNOT and Hadamard with ideal gates.
    PhysicalGates,
    /// Fidelity of the worked-example branch over a grid of input states.
    FidelitySweep,
    /// Interaction times and feasibility against decay times.
    TimingReport,
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// key = value file; flags given on the command line take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Random (xi, t) draws per operator.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Overrides the subcommand's pass threshold.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Coupling g / 2pi in kHz.
    #[arg(long, global = true)]
    g_khz: Option<f64>,
    #[arg(long, global = true)]
    delta_over_g: Option<f64>,
    #[arg(long, global = true)]
    q_factor: Option<f64>,
    #[arg(long, global = true)]
    cavity_ghz: Option<f64>,
    /// Seconds.
    #[arg(long, global = true)]
    radiative_time: Option<f64>,
    /// Duration of one classical pulse, seconds.
    #[arg(long, global = true)]
    pulse_time: Option<f64>,
    #[arg(long, global = true)]
    excitation_probability: Option<f64>,
    /// Staggered-entry offset as a fraction of the two-atom cavity time.
    #[arg(long, global = true)]
    offset: Option<f64>,
    /// Grid spacing of the fidelity sweep; 1/step must be an integer.
    #[arg(long, global = true)]
    step: Option<f64>,
    /// Common phase of all t_m in the fidelity sweep, radians.
    #[arg(long, global = true, allow_negative_numbers = true)]
    phase: Option<f64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    verbose: bool,
}

impl Flags {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field.clone() { cfg.$field = v; })*
            };
        }
        take!(
            seed,
            samples,
            g_khz,
            delta_over_g,
            q_factor,
            cavity_ghz,
            radiative_time,
            pulse_time,
            excitation_probability,
            offset,
            step,
            phase,
            format
        );
        if self.tolerance.is_some() {
            cfg.tolerance = self.tolerance;
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        cfg.verbose |= self.verbose;
        Ok(cfg)
    }
}

fn render(output: &Output, format: Format) -> Result<Vec<u8>, CliError> {
    let io = |e: &dyn std::fmt::Display| CliError::Runtime(format!("rendering output: {e}"));
    match format {
        Format::Json => {
            let mut bytes = serde_json::to_vec_pretty(&output.json).map_err(|e| io(&e))?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(output.csv_header).map_err(|e| io(&e))?;
            for row in &output.csv_rows {
                w.write_record(row).map_err(|e| io(&e))?;
            }
            w.into_inner().map_err(|e| io(&e))
        }
    }
}

fn run(cli: &Cli) -> Result<Option<String>, CliError> {
    let cfg = cli.flags.resolve()?;
    for w in cfg.validate()? {
        eprintln!("warning: {w}");
    }
    let output = match cli.command {
        Command::VerifyProtocol => commands::verify_protocol(&cfg)?,
        Command::VerifyDecompositions => commands::verify_decompositions_cmd(&cfg)?,
        Command::PhysicalGates => commands::physical_gates(&cfg)?,
        Command::FidelitySweep => commands::fidelity_sweep_cmd(&cfg)?,
        Command::TimingReport => commands::timing_report_cmd(&cfg)?,
    };
    let bytes = render(&output, cfg.format)?;
    match &cfg.out {
        Some(path) => fs::write(path, &bytes)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?,
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| CliError::Runtime(e.to_string()))?,
    }
    for line in &output.summary {
        eprintln!("{line}");
    }
    Ok(output.failure)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(failure)) => {
            eprintln!("verification failed: {failure}");
            ExitCode::from(1)
        }
        Err(CliError::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
