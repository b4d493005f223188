use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hardy_lab::quadrature::QuadratureSpec;

mod report;
mod suites;

use report::Format;

#[derive(Parser, Debug)]
#[command(name = "hardy-lab", version, about = "Sharp-constant experiments for Hardy-type operators on mixed radial-angular spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Report path; standard output when absent
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Seed for randomized profile families
    #[arg(long, global = true, default_value_t = 2024)]
    pub seed: u64,
    #[arg(long, global = true, env = "HARDY_LAB_REL_TOL", default_value_t = 1e-10)]
    rel_tol: f64,
    #[arg(long, global = true, env = "HARDY_LAB_ABS_TOL", default_value_t = 1e-14)]
    abs_tol: f64,
    #[arg(long, global = true, env = "HARDY_LAB_MAX_SUBDIVISIONS", default_value_t = 10_000)]
    max_subdivisions: usize,
    #[arg(long, global = true, env = "HARDY_LAB_TAIL_TOL", default_value_t = 1e-12)]
    tail_tol: f64,
}

impl Common {
    pub fn quadrature(&self) -> hardy_lab::Result<QuadratureSpec> {
        QuadratureSpec::new(self.rel_tol, self.abs_tol, self.max_subdivisions, self.tail_tol)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ratios of H on the family f_ε against the sharp constant
    VerifyHardy(suites::HardyArgs),
    /// Random upper-bound checks and the f_ε family for H*
    VerifyDual(suites::DualArgs),
    /// Attainment of the fractional constant by f₀
    VerifyFractional(suites::FractionalArgs),
    /// Weak-type ratios of H on ball indicators
    VerifyWeak(suites::WeakArgs),
    /// Spherical-average reduction against direct quadrature
    CheckRotation(suites::RotationArgs),
    /// Print the closed-form sharp constants
    Constants(suites::ConstantsArgs),
    /// Hardy, dual and weak experiments over a parameter grid
    Sweep(suites::SweepArgs),
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl From<hardy_lab::Error> for CliError {
    fn from(e: hardy_lab::Error) -> Self {
        match e {
            hardy_lab::Error::Quadrature(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let c = &cli.common;
    let spec = c.quadrature()?;
    let report = match &cli.command {
        Command::VerifyHardy(a) => suites::verify_hardy(a, c, &spec)?,
        Command::VerifyDual(a) => suites::verify_dual(a, c, &spec)?,
        Command::VerifyFractional(a) => suites::verify_fractional(a, c, &spec)?,
        Command::VerifyWeak(a) => suites::verify_weak(a, c, &spec)?,
        Command::CheckRotation(a) => suites::check_rotation(a, c, &spec)?,
        Command::Sweep(a) => suites::sweep(a, c, &spec)?,
        Command::Constants(a) => {
            let report = suites::constants(a, c, &spec)?;
            let mut out = io::stdout().lock();
            for (k, v) in &report.header.constants {
                writeln!(out, "{k} = {}", report::float(*v))?;
            }
            if c.output.is_none() {
                return Ok(true);
            }
            report
        }
    };
    match &c.output {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            report.write(c.format, &mut w)?;
            w.flush()?;
        }
        None => report.write(c.format, &mut io::stdout().lock())?,
    }
    Ok(report.header.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("hardy-lab: tolerance check failed (see report)");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("hardy-lab: {e}");
            ExitCode::from(match e {
                CliError::Numeric(_) => 1,
                CliError::Config(_) => 2,
                CliError::Io(_) => 3,
            })
        }
    }
}
