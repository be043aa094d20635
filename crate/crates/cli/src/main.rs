//! `hypcoh` command-line experiments.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hypcoh::word::Gen;

use config::ExperimentConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("config: {0}")]
    Config(String),
    #[error("writing {0}: {1}")]
    Csv(String, String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Library(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            _ => 3,
        }
    }
}

const OUTPUT_HELP: &str = "\
Output files (CSV, written to --out):
  <command>-properties.csv  name, samples, max_residual, threshold, pass
  qm-values.csv             word, length, q
  qm-defect.csv             g, h, q_g, q_h, q_gh, defect
  twist-samples.csv         theta, earthquake, truncation_bound, chain, fixed_point, bracket, normalized_residual
  twist-orbits.csv          region, start, n, value, residual
  three-region-report.csv   cocycle, regions, samples, min, max, spread, limit
  three-region-orbits.csv   cocycle, n, residual
  h1-matrix.csv             row, a, b, c, d
Lines starting with '#' are comments. twist and plot also write <command>-<timestamp>.svg.

Exit status: 0 when every property passes, 1 when one fails, 2 on a usage or
config error, 3 on any other error.";

#[derive(Debug, Parser)]
#[command(name = "hypcoh", version, about = "Bounded cohomology experiments on the genus-2 surface group", after_help = OUTPUT_HELP)]
struct Cli {
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Multiplies every quadrature tolerance. Thresholds are not affected.
    #[arg(long, global = true)]
    tolerance_scale: Option<f64>,
    /// Comma-separated group words, e.g. `a,bA,cDCd`.
    #[arg(long, global = true, value_delimiter = ',')]
    words: Option<Vec<String>>,
    /// Earthquake depth.
    #[arg(long, global = true)]
    depth: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the de Rham quasimorphism and check its properties.
    Qm,
    /// Check the cocycle, alternation and invariance identities.
    CocycleCheck,
    /// Compare the earthquake with the fixed-point boundary map.
    Twist {
        #[arg(long, default_value = "a")]
        curve: Gen,
        #[arg(long)]
        iterations: Option<usize>,
    },
    /// Evaluate cocycles on triples of regions moved by a twist.
    ThreeRegion {
        /// 2-form name from the config.
        #[arg(long)]
        form: Option<String>,
        /// Three region indices, e.g. `0,1,2`.
        #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
        regions: Vec<usize>,
        #[arg(long, default_value = "a")]
        curve: Gen,
    },
    /// Action of a twist word on first homology.
    H1 {
        /// Twist letters, e.g. `aBc` for Ta Tb^-1 Tc.
        word: String,
    },
    /// Draw the lifts of a curve and the regions its earthquake moves.
    Plot {
        #[arg(long, default_value = "a")]
        curve: Gen,
    },
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(d) = cli.depth {
        cfg.budgets.depth = d;
    }
    if let Some(s) = cli.tolerance_scale {
        cfg = cfg.with_tolerance_scale(s)?;
    }
    std::fs::create_dir_all(&cli.out).map_err(|e| CliError::Io(cli.out.display().to_string(), e))?;
    let out = cli.out.as_path();

    let rows = match cli.command {
        Command::Qm => {
            let words = commands::resolve_words(&cfg, cli.words.as_deref())?;
            commands::qm(&cfg, &words, out)?
        }
        Command::CocycleCheck => commands::cocycle_check(&cfg, out)?,
        Command::Twist { curve, iterations } => {
            commands::twist(&cfg, curve, iterations.unwrap_or(cfg.budgets.iterations), out)?
        }
        Command::ThreeRegion { form, regions, curve } => {
            let form = form
                .or_else(|| cfg.three_region_form.clone())
                .ok_or_else(|| CliError::Usage("no --form given and three_region_form is not set".into()))?;
            let regions: [usize; 3] =
                regions.try_into().map_err(|_| CliError::Usage("--regions takes exactly three indices".into()))?;
            commands::three_region(&cfg, &form, regions, curve, out)?
        }
        Command::H1 { word } => commands::h1(&word, out)?,
        Command::Plot { curve } => commands::plot(&cfg, curve, out)?,
    };
    Ok(report::summarize(&rows))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
