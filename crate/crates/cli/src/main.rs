//! Command-line driver for the verification experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use otlab_core::verify::{ExperimentConfig, OutputFormat, Registry};
use otlab_core::Error;

#[derive(Parser)]
#[command(name = "otlab", version, about = "Numerical checks for optimal L² extension")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimal extension norm versus the sharp bound along V.
    OtOptimal(RunArgs),
    /// Monotonicity in t of the deformed chain and its dual.
    MonotoneT(RunArgs),
    /// Convergence of the deformed norm as p grows.
    PLimit(RunArgs),
    /// Convexity in t of log dual norms.
    Convexity(RunArgs),
    /// Quotient norms modulo multiplier ideals at a jump.
    Nonreduced(RunArgs),
    /// Jumping numbers, staircases and the membership oracle.
    JumpSpectrum(RunArgs),
    /// List registered experiments.
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Radial Gauss–Legendre order.
    #[arg(long)]
    quad_order: Option<usize>,
    /// Polynomial truncation degree.
    #[arg(long)]
    degree: Option<u32>,
}

fn run(name: &str, args: &RunArgs) -> Result<bool, Error> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(r) = args.quad_order {
        cfg.quadrature.radial = Some(r);
    }
    if let Some(d) = args.degree {
        cfg.degree = Some(d);
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out").join(name));
    let report = Registry::builtin().run(name, &cfg)?;
    let format = match args.format {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    };
    report.write(&out, format)?;
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.claim);
        if !c.passed {
            if let Some(d) = &c.detail {
                println!("     lhs {:e} rhs {:e} tol {:e}; {d}", c.lhs, c.rhs, c.tolerance);
            }
        }
    }
    println!("report written to {}", out.display());
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::OtOptimal(a) => ("ot-optimal", a),
        Command::MonotoneT(a) => ("monotone-t", a),
        Command::PLimit(a) => ("p-limit", a),
        Command::Convexity(a) => ("convexity", a),
        Command::Nonreduced(a) => ("nonreduced", a),
        Command::JumpSpectrum(a) => ("jump-spectrum", a),
        Command::List => {
            for e in Registry::builtin().iter() {
                println!("{:<14} {}", e.name(), e.summary());
            }
            return ExitCode::SUCCESS;
        }
    };
    match run(name, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
