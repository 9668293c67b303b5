//! Command-line front end for the gkdv toolkit.
//!
//! Exit codes: 0 success, 1 failed repro scenario or I/O failure, 2 usage
//! error, 3 domain or hypothesis error. Errors are written to stderr as one
//! JSON object; results go to stdout.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod error;
pub mod format;
pub mod repro;

pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "gkdv",
    version,
    about = "Symmetry, soliton and simulation tools for u_t = f(u) u_x + u_xxx"
)]
pub struct Cli {
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for randomized sweeps.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Suppress everything on stdout except requested data.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the point symmetries of the equation for a given f(u).
    Classify(ClassifyArgs),
    /// Solitary-wave profile from the travelling-wave reduction.
    Travelwave(TravelwaveArgs),
    /// Closed-form sech soliton parameters.
    Soliton(SolitonArgs),
    /// Integrate a similarity-reduced ODE and optionally lift it back.
    Reduce(ReduceArgs),
    /// Pseudospectral time evolution on a periodic cell.
    Simulate(SimulateArgs),
    /// Run named verification scenarios and print a PASS/FAIL table.
    Repro(ReproArgs),
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Nonlinearity f(u).
    #[arg(long, allow_hyphen_values = true)]
    pub f: String,
    /// Closed sample interval `lo,hi` for u.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true, default_value = "-1,1")]
    pub domain: [f64; 2],
    /// Sample points used for the generator defects.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(2..))]
    pub samples: u32,
}

#[derive(Debug, Args)]
pub struct TravelwaveArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub f: String,
    /// Crest value, the turning point of the orbit.
    #[arg(long, allow_negative_numbers = true)]
    pub w0: f64,
    /// Half width of the sampled window.
    #[arg(long, default_value_t = 30.0)]
    pub zmax: f64,
    #[arg(long, default_value_t = 601)]
    pub n: usize,
    /// Write `z,w,dw` samples here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolitonArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Inverse width.
    #[arg(long = "A", default_value_t = 0.5)]
    pub big_a: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub f0: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub u0: f64,
    /// Phase offset b.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phase: f64,
    /// Report closed-form and perturbed residuals.
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReduceCase {
    Power,
    Exp,
    Log,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[arg(long, value_enum)]
    pub case: ReduceCase,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub f0: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub c1: f64,
    /// Initial data `w,w',w''` at the start of the span.
    #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
    pub ic: [f64; 3],
    /// Integration span `z0,z1`; the initial data sit at z0.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub span: [f64; 2],
    /// Lift onto the patch `t0,t1,x0,x1` and report the residual.
    #[arg(long, value_parser = parse_quad, allow_hyphen_values = true)]
    pub lift: Option<[f64; 4]>,
    /// Write `z,w,dw,ddw,dddw` samples here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub f: String,
    /// `soliton:alpha=..,A=..[,f0=..,u0=..]` or `file:<csv>`.
    #[arg(long)]
    pub ic: String,
    /// Period of the cell.
    #[arg(long = "L", default_value_t = 80.0)]
    pub len: f64,
    /// Grid size, a power of two; inferred from the file for `file:` data.
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Final time.
    #[arg(long = "T", default_value_t = 4.0)]
    pub t_end: f64,
    /// Time step; chosen from the stability bound when omitted.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Write the run report as JSON here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Write `t,x,u` snapshots here.
    #[arg(long)]
    pub snapshots: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReproArgs {
    #[arg(value_enum)]
    pub name: repro::ScenarioName,
}

fn parse_list<const K: usize>(text: &str) -> Result<[f64; K], String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != K {
        return Err(format!("expected {K} comma-separated numbers, got `{text}`"));
    }
    let mut out = [0.0; K];
    for (slot, p) in out.iter_mut().zip(&parts) {
        *slot = p.parse().map_err(|_| format!("`{p}` is not a number"))?;
    }
    Ok(out)
}

fn parse_pair(text: &str) -> Result<[f64; 2], String> {
    parse_list(text)
}

fn parse_triple(text: &str) -> Result<[f64; 3], String> {
    parse_list(text)
}

fn parse_quad(text: &str) -> Result<[f64; 4], String> {
    parse_list(text)
}

/// Executes a parsed command line, writing results to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let g = commands::Global {
        json: cli.json,
        quiet: cli.quiet,
        seed: cli.seed,
    };
    match &cli.command {
        Command::Classify(a) => commands::classify(a, &g, out),
        Command::Travelwave(a) => commands::travelwave(a, &g, out),
        Command::Soliton(a) => commands::soliton(a, &g, out),
        Command::Reduce(a) => commands::reduce(a, &g, out),
        Command::Simulate(a) => commands::simulate(a, &g, out),
        Command::Repro(a) => commands::repro(a, &g, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn lists_parse() {
        assert_eq!(parse_pair("-5, 5").unwrap(), [-5.0, 5.0]);
        assert!(parse_pair("1").is_err());
        assert!(parse_triple("1,2,x").is_err());
    }

    #[test]
    fn negative_values_are_accepted() {
        let cli = Cli::try_parse_from([
            "gkdv", "reduce", "--case", "power", "--alpha", "2", "--ic", "-0.1,0,0", "--span", "-5,5", "--f0", "-1",
        ])
        .unwrap();
        match cli.command {
            Command::Reduce(r) => {
                assert_eq!(r.ic, [-0.1, 0.0, 0.0]);
                assert_eq!(r.span, [-5.0, 5.0]);
                assert_eq!(r.f0, -1.0);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn unknown_scenario_is_a_usage_error() {
        let err = Cli::try_parse_from(["gkdv", "repro", "unknown-name"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
