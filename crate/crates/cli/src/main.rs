//! `gaplab` — batch front end for the prime-gap sieve laboratory.
//!
//! Exit codes are a contract: 0 = success / claim verified, 1 = claim not
//! verified (target missed, tuple inadmissible, cover incomplete), 2 = usage
//! or computation error.  Identical invocations produce byte-identical
//! documents; randomness is always seeded.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::{
    ConcentrateArgs, CoverArgs, ExpectArgs, GapsAction, OptimizeArgs, TupleAction, WeightsArgs,
};
use output::{render_csv, render_json, CommandOutput, Envelope};

#[derive(Parser)]
#[command(
    name = "gaplab",
    version,
    about = "Prime-gap sieve laboratory: eigenvalue certificates, admissible tuples, covering systems, prime statistics",
    propagate_version = true
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
pub struct GlobalOpts {
    /// Seed for every randomized stage and Monte Carlo estimate
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output format (csv is available for the tabular gaps reports)
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the document to this path instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Cap worker threads; results are identical at any cap
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn tag(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Certify the sieve ratio λ_max for a basis family at one k
    Optimize(OptimizeArgs),
    /// Admissible-tuple verification and search
    Tuple {
        #[command(subcommand)]
        action: TupleAction,
    },
    /// Residue-class coverings of {1,…,y} and their CRT gap witnesses
    Cover(CoverArgs),
    /// Prime-gap scans, growth curves, and interval histograms
    Gaps {
        #[command(subcommand)]
        action: GapsAction,
    },
    /// Expected primes per tuple from a certified ratio, or the full pipeline
    Expect(ExpectArgs),
    /// Probability-profile moments and Monte Carlo concentration
    Concentrate(ConcentrateArgs),
    /// Brute-force probe of the divisor-sum sieve weights
    Weights(WeightsArgs),
}

fn dispatch(cli: &Cli) -> anyhow::Result<CommandOutput> {
    match &cli.command {
        Command::Optimize(args) => commands::run_optimize(&cli.global, args),
        Command::Tuple { action } => match action {
            TupleAction::Verify(args) => commands::run_tuple_verify(&cli.global, args),
            TupleAction::Search(args) => commands::run_tuple_search(&cli.global, args),
            TupleAction::ShiftedPrimes(args) => commands::run_tuple_shifted(&cli.global, args),
        },
        Command::Cover(args) => commands::run_cover(&cli.global, args),
        Command::Gaps { action } => match action {
            GapsAction::Scan(args) => commands::run_gaps_scan(&cli.global, args),
            GapsAction::Curves(args) => commands::run_gaps_curves(&cli.global, args),
            GapsAction::Intervals(args) => commands::run_gaps_intervals(&cli.global, args),
        },
        Command::Expect(args) => commands::run_expect(&cli.global, args),
        Command::Concentrate(args) => commands::run_concentrate(&cli.global, args),
        Command::Weights(args) => commands::run_weights(&cli.global, args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.global.threads {
        // Only caps parallelism; every estimator is chunk-deterministic.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let out = match dispatch(&cli) {
        Ok(out) => out,
        Err(err) => {
            eprintln!("error: {err:#}");
            return ExitCode::from(2);
        }
    };
    let envelope = Envelope {
        tool: "gaplab",
        version: env!("CARGO_PKG_VERSION"),
        command: out.command,
        config: out.config,
        result: out.result,
    };
    let rendered = match cli.global.format {
        Format::Json => render_json(&envelope),
        Format::Csv => match &out.table {
            Some(table) => render_csv(&envelope, table),
            None => {
                eprintln!("error: csv output is only available for the gaps reports");
                return ExitCode::from(2);
            }
        },
    };
    let rendered = match rendered {
        Ok(text) => text,
        Err(err) => {
            eprintln!("error: {err:#}");
            return ExitCode::from(2);
        }
    };
    if let Err(err) = output::write_output(&rendered, cli.global.out.as_deref()) {
        eprintln!("error: {err:#}");
        return ExitCode::from(2);
    }
    if out.verified {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
