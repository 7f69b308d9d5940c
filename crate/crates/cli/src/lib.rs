//! Command-line front end: config parsing, the subcommands and the
//! acceptance suite behind `verify`.

pub mod commands;
pub mod config;
pub mod output;
pub mod suite;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use frobtr::Error;

use config::{Format, RunConfig};
use suite::Fault;

#[derive(Parser, Debug)]
#[command(name = "frobtr", version, about = "Topological recursion and Frobenius-side checks on genus-0 spectral curves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// exact | bigfloat:<digits>
    #[arg(long, global = true)]
    pub backend: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_parser = ["json", "csv"])]
    pub format: Option<String>,
    /// Test hook: corrupt one input of the suite on purpose.
    #[arg(long, global = true, hide = true, value_parser = ["sign-flip"])]
    pub inject_fault: Option<String>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Ramification data, Morse charts, beta matrix and Bergman coefficients.
    CurveInfo,
    /// omega_{g,n} from the Eynard-Orantin recursion.
    Recursion,
    /// R_Sigma from the Bergman kernel with its consistency checks.
    #[command(name = "r-matrix")]
    RMatrix,
    /// Admissible dimensions of the rank-2 families.
    #[command(name = "classify-2d")]
    Classify2d,
    /// Calibration and unstable descendants of a Frobenius point.
    Descendants,
    /// Cycle pullbacks against the Frobenius-side local recursion.
    Compare,
    /// Run the acceptance suite.
    Verify,
}

/// Exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;
pub const EXIT_DEGENERATE: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::Budget(_)
        | Error::Depth(_)
        | Error::Index(_)
        | Error::Dimension(_)
        | Error::NotRepresentable(_)
        | Error::UnsupportedCoefficient(_)
        | Error::UnsupportedSpectrum(_) => EXIT_CONFIG,
        Error::Internal(_) => EXIT_VERIFY,
        _ => EXIT_DEGENERATE,
    }
}

/// Runs a parsed command line; returns the report text and the exit code.
pub fn execute(cli: &Cli) -> Result<(String, i32), Error> {
    let cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
            RunConfig::from_json(&text).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("{}: {m}", p.display())),
                other => other,
            })?
        }
        None => RunConfig::default(),
    };
    let format = match cli.format.as_deref() {
        Some("csv") => Format::Csv,
        Some(_) => Format::Json,
        None => cfg.format.unwrap_or(Format::Json),
    };
    let fault = match cli.inject_fault.as_deref() {
        Some(_) => Fault::SignFlipR1,
        None => Fault::None,
    };
    let (report, code) = match cli.command {
        Command::Verify => {
            // verify defaults to the full bigfloat suite
            let be = match (cli.backend.as_deref(), cfg.backend.as_deref()) {
                (None, None) => frobtr::Backend::float(60)?,
                (flag, _) => cfg.backend(flag)?,
            };
            let (rep, ok) = commands::verify(&cfg, &be, fault)?;
            (rep, if ok { EXIT_OK } else { EXIT_VERIFY })
        }
        other => {
            let be = cfg.backend(cli.backend.as_deref())?;
            let rep = match other {
                Command::CurveInfo => commands::curve_info(&cfg, &be)?,
                Command::Recursion => commands::recursion(&cfg, &be)?,
                Command::RMatrix => commands::r_matrix(&cfg, &be)?,
                Command::Classify2d => commands::classify_2d(&cfg, &be)?,
                Command::Descendants => commands::descendants(&cfg, &be)?,
                Command::Compare => commands::compare(&cfg, &be)?,
                Command::Verify => unreachable!("handled above"),
            };
            (rep, EXIT_OK)
        }
    };
    Ok((report.render(format), code))
}
