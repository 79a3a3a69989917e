//! Command-line front end: runs a JSON-configured experiment and writes the
//! resulting table to stdout or a file.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use freepart::config::{ExperimentConfig, Mode, OutputFormat};
use freepart::experiment::{render, run};
use freepart::Error;

#[derive(Parser)]
#[command(
    name = "freepart",
    about = "Exact moments and cumulants of free particle systems and their Poisson/Levy limits",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate finite-system mixed moments against their limit values
    Moments(CommonArgs),
    /// Sweep a volume schedule and estimate empirical convergence orders
    Converge(CommonArgs),
    /// Cross-check the combinatorial pipeline against the operator oracles
    Oracle(CommonArgs),
    /// List set partitions with non-crossing flags and counts
    Partitions(CommonArgs),
}

#[derive(clap::Args)]
struct CommonArgs {
    /// JSON experiment configuration
    #[arg(long)]
    config: PathBuf,
    /// Output path (defaults to the config's `out`, else stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format, overriding the config
    #[arg(long, value_parser = parse_format)]
    format: Option<OutputFormat>,
    /// Worker threads for schedule sweeps (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Assert that the run uses no randomness (always true; accepted for
    /// scripting symmetry)
    #[arg(long)]
    seedless: bool,
}

fn parse_format(s: &str) -> std::result::Result<OutputFormat, String> {
    match s {
        "csv" => Ok(OutputFormat::Csv),
        "json" => Ok(OutputFormat::Json),
        other => Err(format!("unknown format {other:?} (expected csv or json)")),
    }
}

fn expected_mode(cmd: &Command) -> Mode {
    match cmd {
        Command::Moments(_) => Mode::Moments,
        Command::Converge(_) => Mode::Converge,
        Command::Oracle(_) => Mode::Oracle,
        Command::Partitions(_) => Mode::Partitions,
    }
}

fn execute(cli: &Cli) -> freepart::Result<()> {
    let args = match &cli.command {
        Command::Moments(a) | Command::Converge(a) | Command::Oracle(a) | Command::Partitions(a) => a,
    };
    if let Some(threads) = args.threads {
        if threads == 0 {
            return Err(Error::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Usage(format!("cannot configure thread pool: {e}")))?;
    }

    let cfg = ExperimentConfig::from_path(&args.config)?;
    let expected = expected_mode(&cli.command);
    if cfg.mode != expected {
        return Err(Error::Usage(format!(
            "subcommand expects mode {expected:?} but the config says {:?}",
            cfg.mode
        )));
    }

    let report = run(&cfg)?;
    let format = args.format.unwrap_or(cfg.format);
    let text = render(&report, format);

    let out_path = args
        .out
        .clone()
        .or_else(|| cfg.out.as_ref().map(PathBuf::from));
    match out_path {
        Some(path) => std::fs::write(&path, &text)?,
        None => print!("{text}"),
    }

    if report.has_oracle_mismatch() {
        return Err(Error::OracleMismatch(
            "oracle cross-check reported at least one mismatch".into(),
        ));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
