//! `vglab`: metric specs in, verification reports and tables out.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod grid;
mod metric_spec;
mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use grid::Spacing;
use metric_spec::Kind;
use std::path::PathBuf;
use std::process::ExitCode;

/// Exit status for malformed invocations and inputs.
const EXIT_USAGE: u8 = 64;
const EXIT_SOFTWARE: u8 = 70;
const EXIT_IO: u8 = 74;

#[derive(Parser, Debug)]
#[command(name = "vglab", version, about = "Volume-growth verification lab for model Riemannian metrics")]
struct Cli {
    /// Multiplies every certificate and quadrature tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Resolve a metric spec and print it with its derived constants.
    Build(BuildArgs),
    /// Pointwise curvature over a grid of the warp parameter.
    Curvature(TableArgs),
    /// Ball volumes and Euclidean ratios over a radius grid.
    Volume(TableArgs),
    /// Run one certificate.
    Verify(VerifyArgs),
    /// Nonnegativity verdict for a radial Schrödinger operator.
    Spectral(SpectralArgs),
    /// Repeat a certificate over a grid of one parameter.
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct MetricArgs {
    /// Metric spec file (JSON).
    #[arg(long)]
    pub metric: Option<PathBuf>,
    /// Metric kind, when no spec file is given.
    #[arg(long, value_enum)]
    pub kind: Option<Kind>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "R")]
    pub r: Option<f64>,
    #[arg(long = "Rbar")]
    pub rbar: Option<f64>,
    #[arg(long = "K")]
    pub k: Option<usize>,
    /// Mollifier width replacing the default in the two-ended model.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Growth weights, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub a: Option<Vec<f64>>,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output file; a `.meta.json` sidecar is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TableArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    /// `start:stop:count`.
    #[arg(long)]
    pub radii: String,
    #[arg(long, value_enum, default_value = "log")]
    pub grid: Spacing,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Cert {
    Lemma1,
    Lemma2,
    ThmA,
    ThmB,
    ThmC,
    Growth,
    Bishop,
    ThmD,
    ThmE,
    SecondVariation,
}

#[derive(Args, Debug, Clone)]
pub struct CertArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Radii as `start:stop:count`; ball radii for thm-d and thm-e.
    #[arg(long)]
    pub radii: Option<String>,
    #[arg(long, value_enum, default_value = "log")]
    pub grid: Spacing,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub cert: Cert,
    #[command(flatten)]
    pub cert_args: CertArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Potential {
    /// `λρ`, ρ the lowest Ricci eigenvalue.
    Rho,
    /// `−λ·Ricm`.
    Ricm,
    /// The constant `−λ`.
    Shift,
    /// `−λ/r²` beyond the unit ball, on Euclidean space.
    InverseSquare,
}

#[derive(Args, Debug)]
pub struct SpectralArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value = "rho")]
    pub potential: Potential,
    /// Spherical-harmonic degree of the sector.
    #[arg(long, default_value_t = 0)]
    pub angular: u32,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    N,
    #[value(name = "R")]
    R,
    #[value(name = "Rbar")]
    Rbar,
    #[value(name = "K")]
    K,
    Nu,
    Lambda,
    Alpha,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(value_enum)]
    pub cert: Cert,
    /// Parameter to vary.
    #[arg(long, value_enum)]
    pub param: SweepParam,
    /// Values as `start:stop:count`, spaced by `--values-grid`.
    #[arg(long)]
    pub values: String,
    #[arg(long, value_enum, default_value = "log")]
    pub values_grid: Spacing,
    /// Directory receiving one report per point and `index.json`.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub cert_args: CertArgs,
}

/// An input problem reported with the usage exit status.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn exit_status(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<Usage>() || cause.is::<serde_json::Error>() {
            return EXIT_USAGE;
        }
        if cause.is::<std::io::Error>() {
            return EXIT_IO;
        }
        if let Some(err) = cause.downcast_ref::<vglab::Error>() {
            return match err {
                vglab::Error::Param(_) => EXIT_USAGE,
                // The certificate cannot be issued for this metric.
                vglab::Error::Hypothesis(_) => 1,
                _ => EXIT_SOFTWARE,
            };
        }
    }
    EXIT_USAGE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("vglab: {e:#}");
            ExitCode::from(exit_status(&e))
        }
    }
}
