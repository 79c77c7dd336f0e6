//! Command-line front end: config ingestion, analysis subcommands, result
//! serialization and graph caching.

mod artifacts;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "rifs", version, about = "Exact analysis of random homogeneous iterated function systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// config file (JSON)
    config: PathBuf,
    /// override the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// override the selection weights, e.g. "1/2,1/2"
    #[arg(long)]
    theta: Option<String>,
    /// significand digits for transcendental evaluation
    #[arg(long, default_value_t = 100)]
    precision_digits: u32,
    /// write machine-readable artifacts (result.json, manifest.json, ...)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Spectrum,
    FiniteType,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    Leftmost,
    Random,
    Min,
    Max,
}

#[derive(Subcommand)]
enum Command {
    /// Structural, separation and regularity checks
    Validate {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, value_enum, default_value = "spectrum")]
        mode: ModeArg,
    },
    /// Moment-scaling curve and Legendre spectrum (CSV on stdout)
    Spectrum {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
        q_min: f64,
        #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
        q_max: f64,
        #[arg(long, default_value_t = 0.25)]
        q_step: f64,
        /// cap on the choice-vector enumeration
        #[arg(long, default_value_t = 1 << 20)]
        cap: usize,
    },
    /// Enumerate the characteristic-vector graph
    Enumerate {
        #[command(flatten)]
        common: CommonOpts,
        /// node cap for the breadth-first enumeration
        #[arg(long, default_value_t = 100_000)]
        cap: usize,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        /// also check that every retained vector is hit by a deep cylinder
        #[arg(long)]
        validate_liveness: bool,
        /// run the pooled-contraction sufficient finite-type check instead
        #[arg(long)]
        pooled: bool,
    },
    /// Essential class and its per-letter count matrices
    Essential {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, default_value_t = 100_000)]
        cap: usize,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Monte Carlo almost-sure dimension from the essential class
    Dimension {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, default_value_t = 100_000)]
        depth: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 100_000)]
        cap: usize,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Policy-driven local-dimension estimates along symbolic paths
    Localdim {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, value_enum, default_value = "random")]
        policy: PolicyArg,
        #[arg(long, default_value_t = 100_000)]
        depth: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        /// accept non-regular measures (the estimate is then a path
        /// Lyapunov exponent, not necessarily a local dimension)
        #[arg(long)]
        allow_irregular: bool,
        #[arg(long, default_value_t = 100_000)]
        cap: usize,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Sink word, block extremes and the local-dimension interval
    Commuting {
        #[command(flatten)]
        common: CommonOpts,
        /// longest sink word to search for
        #[arg(long, default_value_t = 8)]
        sink_len: usize,
        /// deepest neck length enumerated exhaustively
        #[arg(long, default_value_t = 8)]
        block_max: usize,
        /// neck-length distribution truncation
        #[arg(long, default_value_t = 64)]
        neck_cap: usize,
        #[arg(long, default_value_t = 100_000)]
        cap: usize,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        /// also run the interpolation sweep with this many t steps
        #[arg(long)]
        interpolate: Option<usize>,
        #[arg(long, default_value_t = 20_000)]
        depth: usize,
        #[arg(long, default_value_t = 12)]
        trials: usize,
    },
    /// Endpoint-isolation diagnostic at x = 0
    Isolated {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, default_value_t = 20_000)]
        depth: usize,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        /// longest essential cycle searched for the interior supremum
        #[arg(long, default_value_t = 6)]
        cycle_len: usize,
        /// path-length constant for the analytic interior bound
        #[arg(long)]
        analytic_constant: Option<usize>,
        #[arg(long, default_value_t = 100_000)]
        cap: usize,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Cylinder tables and empirical local dimensions
    Simulate {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// estimate the local dimension at this point (rational in [0,1])
        #[arg(long)]
        x: Option<String>,
        /// comma-separated levels for the estimates
        #[arg(long)]
        levels: Option<String>,
        /// cylinder-entry budget
        #[arg(long, default_value_t = rifs_core::model::DEFAULT_CYLINDER_BUDGET)]
        budget: usize,
    },
    /// Brute-force cross-checks of the exact machinery
    Oracle {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 100_000)]
        cap: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Validate { common, mode } => commands::validate(common, mode),
        Command::Spectrum { common, q_min, q_max, q_step, cap } => {
            commands::spectrum(common, q_min, q_max, q_step, cap)
        }
        Command::Enumerate { common, cap, cache_dir, validate_liveness, pooled } => {
            commands::enumerate(common, cap, cache_dir, validate_liveness, pooled)
        }
        Command::Essential { common, cap, cache_dir } => {
            commands::essential(common, cap, cache_dir)
        }
        Command::Dimension { common, depth, trials, cap, cache_dir } => {
            commands::dimension(common, depth, trials, cap, cache_dir)
        }
        Command::Localdim { common, policy, depth, trials, allow_irregular, cap, cache_dir } => {
            commands::localdim(common, policy, depth, trials, allow_irregular, cap, cache_dir)
        }
        Command::Commuting {
            common,
            sink_len,
            block_max,
            neck_cap,
            cap,
            cache_dir,
            interpolate,
            depth,
            trials,
        } => commands::commuting(
            common, sink_len, block_max, neck_cap, cap, cache_dir, interpolate, depth, trials,
        ),
        Command::Isolated { common, depth, trials, cycle_len, analytic_constant, cap, cache_dir } => {
            commands::isolated(common, depth, trials, cycle_len, analytic_constant, cap, cache_dir)
        }
        Command::Simulate { common, depth, x, levels, budget } => {
            commands::simulate(common, depth, x, levels, budget)
        }
        Command::Oracle { common, trials, cap } => commands::oracle(common, trials, cap),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(err.exit_code())
        }
    }
}
