use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "neadmm",
    version,
    about = "ADMM for nonlinear equality constraints: examples, 1-bit CS, multi-instance learning"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// min x + z s.t. √x + √z = 1 (optimum 1/2)
    Example1(ExampleArgs),
    /// min x + z s.t. x² + z² = 1 (optimum −√2)
    Example2(ExampleArgs),
    /// Per-iteration error bound, Lyapunov value and VI norm on an example
    Diagnose(DiagnoseArgs),
    /// 1-bit compressive sensing on a seeded Gaussian instance
    OnebitCs(OneBitArgs),
    /// Max-rule multi-instance learning with logistic loss and L1 penalty
    MultiInstance(MultiInstanceArgs),
    /// Write a seeded synthetic bag dataset as CSV
    GenerateBags(GenerateBagsArgs),
}

/// `constant` or `increment:DELTA`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleKind {
    Constant,
    Increment(f64),
}

pub fn parse_schedule(s: &str) -> Result<ScheduleKind, String> {
    if s == "constant" {
        return Ok(ScheduleKind::Constant);
    }
    let delta = s
        .strip_prefix("increment:")
        .ok_or_else(|| format!("expected `constant` or `increment:DELTA`, got `{s}`"))?;
    match delta.parse::<f64>() {
        Ok(d) if d >= 0.0 && d.is_finite() => Ok(ScheduleKind::Increment(d)),
        _ => Err(format!("increment must be a finite number >= 0, got `{delta}`")),
    }
}

fn positive_real(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a finite number > 0, got `{s}`")),
    }
}

fn positive_int(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(format!("expected an integer >= 1, got `{s}`")),
    }
}

/// Solver settings shared by every solve; unset values take the
/// subcommand's defaults.
#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Initial penalty parameter
    #[arg(long, value_parser = positive_real)]
    pub rho0: Option<f64>,
    /// `constant` or `increment:DELTA` (ρ grows by DELTA per iteration)
    #[arg(long, value_parser = parse_schedule, default_value = "constant")]
    pub rho_schedule: ScheduleKind,
    #[arg(long, value_parser = positive_int)]
    pub max_iter: Option<usize>,
    #[arg(long, value_parser = positive_real, default_value_t = 1e-6)]
    pub tol_primal: f64,
    #[arg(long, value_parser = positive_real, default_value_t = 1e-6)]
    pub tol_dual: f64,
    /// Trace CSV path; standard output when omitted
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExampleArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Append bound, gap, Lyapunov and VI columns to the trace
    #[arg(long)]
    pub diagnose: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExampleChoice {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[arg(long, value_enum, default_value = "1")]
    pub example: ExampleChoice,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct OneBitArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Signal length N
    #[arg(long, value_parser = positive_int, default_value_t = 128)]
    pub n: usize,
    /// Number of measurements M
    #[arg(long, value_parser = positive_int, default_value_t = 64)]
    pub m: usize,
    /// Sparsity K
    #[arg(long, value_parser = positive_int, default_value_t = 16)]
    pub k: usize,
    #[arg(long, value_parser = positive_real, default_value_t = 10.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BagShape {
    #[arg(long, value_parser = positive_int, default_value_t = 20)]
    pub bags: usize,
    #[arg(long, value_parser = positive_int, default_value_t = 5)]
    pub instances: usize,
    #[arg(long, value_parser = positive_int, default_value_t = 4)]
    pub features: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct MultiInstanceArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Bag CSV (`bag_id,label,f1,...`); a synthetic set is generated when omitted
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_parser = positive_real, default_value_t = 1.0)]
    pub lambda: f64,
    #[command(flatten)]
    pub shape: BagShape,
}

#[derive(Debug, Args)]
pub struct GenerateBagsArgs {
    #[command(flatten)]
    pub shape: BagShape,
    /// Dataset CSV path; standard output when omitted
    #[arg(long)]
    pub output: Option<PathBuf>,
}
