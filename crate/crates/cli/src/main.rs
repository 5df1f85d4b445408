//! `tsps`: sample generators, net construction, verification, export and
//! time-scale derivative tables over versioned JSON files.
//!
//! Exit codes: 0 success, 2 input error, 3 construction failure,
//! 4 invariant failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "tsps", version, about = "Pseudospherical nets on time scales")]
pub struct Cli {
    /// Leave the timestamp out of output metadata (byte-identical reruns).
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write generator output as JSON.
    Sample {
        #[command(subcommand)]
        generator: Generator,
    },
    /// Build a net from Cauchy data and verify it.
    Build(BuildArgs),
    /// Verify a mesh or surface file and write a CSV report.
    Verify(VerifyArgs),
    /// Export a mesh as OBJ or CSV, or a forms field as CSV.
    Export(ExportArgs),
    /// Tabulate delta and nabla derivatives of a built-in function.
    Ts(TsArgs),
}

#[derive(Subcommand, Debug)]
pub enum Generator {
    /// Straight strips at angle gamma with twisted tangent planes.
    Amsler(AmslerArgs),
    /// Random strips from a seeded generator.
    Perturbed(PerturbedArgs),
    /// Chebyshev forms of a sine-Gordon one-soliton.
    SolitonForms(SolitonArgs),
    /// Sphere in longitude/colatitude.
    Sphere(ImmersionArgs),
    /// Circular cylinder.
    Cylinder(ImmersionArgs),
    /// Tractroid of revolution.
    Tractroid(ImmersionArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct AmslerArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.1)]
    pub a: f64,
    #[arg(long, default_value_t = 30)]
    pub n1: usize,
    #[arg(long, default_value_t = 30)]
    pub n2: usize,
    /// Tangent-plane twist per vertex (radians).
    #[arg(long, default_value_t = tsps_core::samples::DEFAULT_TWIST, allow_hyphen_values = true)]
    pub theta: f64,
    #[arg(short, long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct PerturbedArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1)]
    pub a: f64,
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    /// Largest turn of consecutive edges (radians).
    #[arg(long, default_value_t = 0.1)]
    pub amplitude: f64,
    #[arg(long, default_value_t = tsps_core::samples::DEFAULT_TWIST, allow_hyphen_values = true)]
    pub theta: f64,
    #[arg(short, long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct Window {
    #[arg(long, allow_hyphen_values = true)]
    pub umin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub umax: Option<f64>,
    /// Defaults to the u window for soliton forms.
    #[arg(long, allow_hyphen_values = true)]
    pub vmin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub vmax: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub h: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct SolitonArgs {
    #[command(flatten)]
    pub window: Window,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub lambda: f64,
    /// Phase shift inside the exponential.
    #[arg(long, default_value_t = -4.5, allow_hyphen_values = true)]
    pub phase: f64,
    /// Angle must stay in [eps, pi - eps].
    #[arg(long, default_value_t = 5e-4)]
    pub eps: f64,
    #[arg(short, long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ImmersionArgs {
    #[command(flatten)]
    pub window: Window,
    /// Radius for sphere and cylinder.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(short, long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct BuildArgs {
    #[serde(skip)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(short, long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[serde(skip)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Spread of the time-scale curvature reported as constant by the
    /// informational audit on surfaces.
    #[arg(long, default_value_t = 1e-8)]
    pub threshold: f64,
    /// CSV report path (stdout when absent).
    #[arg(short, long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Obj,
    Csv,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    pub input: PathBuf,
    /// Inferred from the output extension when absent; OBJ otherwise.
    #[arg(long, value_enum)]
    pub format: Option<ExportFormat>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Function {
    Poly2,
    Poly3,
    Sin,
    Exp,
}

#[derive(Args, Debug)]
pub struct TsArgs {
    /// TimeScale JSON file.
    pub input: PathBuf,
    #[arg(long = "function", value_enum)]
    pub function: Function,
    #[arg(long, allow_hyphen_values = true)]
    pub lo: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub hi: f64,
    /// Sampling step on continuum pieces.
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
