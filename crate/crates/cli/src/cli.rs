//! Argument parsing and dispatch.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use dualscore_core::Method;

use crate::commands::{self, SweepArgs};
use crate::config::parse_list;
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "dualscore", version, about = "Dual-score regression for binary outcomes under continuous treatment")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic scenario: data.csv, truth.txt and schema.txt.
    Simulate {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=4))]
        scenario: u32,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a model (distilling soft labels and cross-validating as configured).
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a model against a truth file or labelled data.
    Evaluate(EvaluateArgs),
    /// Export the fitted log-odds surface on a grid.
    Heatmap {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 50)]
        rows: usize,
        #[arg(long, default_value_t = 50)]
        cols: usize,
        /// Prognostic-score axis as LO,HI.
        #[arg(long, value_parser = parse_range, default_value = "-3,3")]
        prognostic_range: (f64, f64),
        /// Index-minus-treatment axis as LO,HI; defaults to the central 95%
        /// of the training index.
        #[arg(long, value_parser = parse_range)]
        index_range: Option<(f64, f64)>,
    },
    /// Percentile bootstrap intervals for the coefficients.
    Bootstrap {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 30)]
        k: usize,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare optimizers on simulated data.
    Benchmark {
        #[command(flatten)]
        sweep: SweepFlags,
        /// Comma-separated methods among de, tpe, random.
        #[arg(long, value_delimiter = ',', value_parser = parse_method)]
        methods: Option<Vec<Method>>,
    },
    /// Link-function error as the sample size grows.
    Convergence {
        #[command(flatten)]
        sweep: SweepFlags,
        #[arg(long, default_value_t = 50)]
        heatmap_rows: usize,
        #[arg(long, default_value_t = 50)]
        heatmap_cols: usize,
    },
    /// Dual scores and the best treatment level for one subject.
    Recommend {
        #[arg(long)]
        model: PathBuf,
        /// Comma-separated feature values in model order, or raw source
        /// values in transform order when --transform is given.
        #[arg(long)]
        subject: String,
        #[arg(long, value_parser = parse_range)]
        tau_range: (f64, f64),
        #[arg(long, default_value_t = commands::DEFAULT_RECOMMEND_GRID)]
        grid: usize,
        #[arg(long)]
        transform: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "reference")]
pub struct EvaluateTarget {
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long, requires = "schema")]
    data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    target: EvaluateTarget,
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long)]
    transform: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
}

#[derive(Debug, Args)]
pub struct SweepFlags {
    #[arg(long)]
    scenario: Option<u32>,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SweepFlags {
    fn as_args(&self) -> SweepArgs<'_> {
        SweepArgs {
            scenario: self.scenario,
            sizes: self.sizes.clone(),
            reps: self.reps,
            seed: self.seed,
            config: self.config.as_deref(),
            out: self.out.as_deref(),
        }
    }
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    match parse_list::<f64>(s)?.as_slice() {
        [lo, hi] if lo < hi => Ok((*lo, *hi)),
        [_, _] => Err("expected LO < HI".into()),
        _ => Err("expected LO,HI".into()),
    }
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: dualscore_core::Error| e.to_string())
}

/// Outcome of parsing: a command to run, or text clap wants printed (help,
/// version) with exit status 0.
pub enum Parsed {
    Run(Cli),
    Print(String),
}

pub fn parse<I, T>(args: I) -> CliResult<Parsed>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => Ok(Parsed::Run(cli)),
        Err(e) => match e.kind() {
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                Ok(Parsed::Print(e.to_string()))
            }
            _ => {
                let first = e.to_string();
                let line = first
                    .lines()
                    .find(|l| !l.trim().is_empty())
                    .unwrap_or("invalid arguments")
                    .trim_start_matches("error: ");
                Err(CliError::usage(line))
            }
        },
    }
}

/// Runs a parsed command; text for stdout is returned.
pub fn run(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::Simulate { scenario, n, seed, out } => {
            commands::simulate(scenario, n, seed, &out)?;
            Ok(String::new())
        }
        Command::Fit {
            data,
            schema,
            config,
            out,
        } => {
            commands::fit_command(&data, &schema, config.as_deref(), out.as_deref())?;
            Ok(String::new())
        }
        Command::Evaluate(a) => match (a.target.truth, a.target.data) {
            (Some(truth), None) => commands::evaluate_truth(&a.model, &truth),
            (None, Some(data)) => {
                let schema = a.schema.ok_or_else(|| CliError::usage("--data needs --schema"))?;
                commands::evaluate_data(&a.model, &data, &schema, a.transform.as_deref(), a.threshold)
            }
            _ => Err(CliError::usage("pass exactly one of --truth or --data")),
        },
        Command::Heatmap {
            model,
            out,
            rows,
            cols,
            prognostic_range,
            index_range,
        } => {
            commands::heatmap_command(&model, &out, rows, cols, prognostic_range, index_range)?;
            Ok(String::new())
        }
        Command::Bootstrap {
            data,
            schema,
            config,
            k,
            level,
            out,
        } => commands::bootstrap_command(&data, &schema, config.as_deref(), k, level, out.as_deref()),
        Command::Benchmark { sweep, methods } => commands::benchmark_command(sweep.as_args(), methods),
        Command::Convergence {
            sweep,
            heatmap_rows,
            heatmap_cols,
        } => commands::convergence_command(sweep.as_args(), (heatmap_rows, heatmap_cols)),
        Command::Recommend {
            model,
            subject,
            tau_range,
            grid,
            transform,
        } => commands::recommend_command(&model, &subject, tau_range, grid, transform.as_deref()),
    }
}
