//! Command-line sweeps over the channel models, writing CSV.

pub mod commands;
pub mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::Outcome;
use crate::config::{ConfigError, Settings};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "cifc", version, about = "Sum-rate bound sweeps for the cognitive interference channel")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct Common {
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Plain-text key=value file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build and decode-check linear deterministic schemes.
    LdcVerify {
        #[command(flatten)]
        common: Common,
        /// Direct gains, `a:b[:step]` or a list.
        #[arg(long)]
        nd: Option<String>,
        /// Cross gains, `a:b[:step]` or a list.
        #[arg(long)]
        ni: Option<String>,
        #[arg(long)]
        k: Option<String>,
        /// Whitespace-separated KxK gain block; replaces the symmetric grid.
        #[arg(long)]
        gains: Option<String>,
        /// Enumerate every message tuple regardless of size.
        #[arg(long)]
        exhaustive: bool,
    },
    /// Three-user deterministic outer bound with its entropy cross-check.
    LdcOuter {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        gains: Option<String>,
        /// Number of random gain matrices when no file is given.
        #[arg(long)]
        samples: Option<String>,
        #[arg(long)]
        max_gain: Option<String>,
        /// Random input distributions per channel.
        #[arg(long)]
        trials: Option<String>,
    },
    /// Gaussian inner and outer bounds and their gaps.
    GaussianGap {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: Option<String>,
        /// Interference exponent grid, `start:stop:step` or a list.
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        snr_db: Option<String>,
        /// Objective evaluations for the numerical optimizers; 0 skips them.
        #[arg(long)]
        budget: Option<String>,
    },
    /// Generalized degrees of freedom of the three channel models.
    GdofCurves {
        #[command(flatten)]
        common: Common,
        /// Comma-separated subset of CMS, IFC, BC.
        #[arg(long)]
        models: Option<String>,
        #[arg(long)]
        k: Option<String>,
        #[arg(long)]
        alpha: Option<String>,
        /// Adds fitted slopes over these SNR points.
        #[arg(long)]
        snr_db: Option<String>,
        /// Also report the isolated value at alpha = 1.
        #[arg(long)]
        discontinuity: bool,
    },
}

fn on(b: bool) -> Option<String> {
    b.then(|| "true".to_string())
}

type Runner = fn(&Settings, &mut dyn Write) -> Result<Outcome, ConfigError>;

fn plan(command: Command) -> (Common, Vec<(&'static str, Option<String>)>, Runner) {
    match command {
        Command::LdcVerify { common, nd, ni, k, gains, exhaustive } => {
            let flags = vec![("nd", nd), ("ni", ni), ("k", k), ("gains", gains), ("exhaustive", on(exhaustive))];
            (common, flags, commands::ldc_verify)
        }
        Command::LdcOuter { common, gains, samples, max_gain, trials } => {
            let flags = vec![("gains", gains), ("samples", samples), ("max-gain", max_gain), ("trials", trials)];
            (common, flags, commands::ldc_outer)
        }
        Command::GaussianGap { common, k, alpha, snr_db, budget } => {
            let flags = vec![("k", k), ("alpha", alpha), ("snr-db", snr_db), ("budget", budget)];
            (common, flags, commands::gaussian_gap)
        }
        Command::GdofCurves { common, models, k, alpha, snr_db, discontinuity } => {
            let flags = vec![
                ("models", models),
                ("k", k),
                ("alpha", alpha),
                ("snr-db", snr_db),
                ("discontinuity", on(discontinuity)),
            ];
            (common, flags, commands::gdof_curves)
        }
    }
}

fn execute(cli: Cli) -> Result<Outcome, ConfigError> {
    let (common, mut flags, run) = plan(cli.command);
    flags.push(("seed", common.seed));
    flags.push(("out", common.out.map(|p| p.display().to_string())));
    let allowed: Vec<&str> = flags.iter().map(|(k, _)| *k).collect();
    let settings = Settings::load(common.config.as_deref(), &allowed, flags)?;
    match settings.get("out") {
        Some("") => Err(ConfigError::Field {
            field: "out".into(),
            msg: "path must not be empty".into(),
        }),
        Some(path) => {
            let file = File::create(path).map_err(|source| ConfigError::Read {
                path: path.to_string(),
                source,
            })?;
            let mut w = BufWriter::new(file);
            let outcome = run(&settings, &mut w)?;
            w.flush()?;
            Ok(outcome)
        }
        None => run(&settings, &mut io::stdout().lock()),
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(outcome) if outcome.violations.is_empty() => EXIT_OK,
        Ok(outcome) => {
            eprintln!("{} invariant violation(s)", outcome.violations.len());
            EXIT_VIOLATION
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}
