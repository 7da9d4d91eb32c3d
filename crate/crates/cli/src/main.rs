//! `airyline`: determinantal statistics of the extended Airy kernel and
//! Monte Carlo cross-checks, as a deterministic command-line tool.

mod commands;
mod config;
mod fail;
mod golden;
mod output;
mod svg;

use clap::{Parser, Subcommand};
use commands::SideArg;
use fail::{Failure, Result};
use output::Format;
use std::path::PathBuf;

const AFTER_HELP: &str = "\
CONFIG FILE (genfun, counts, mixing):
  JSON of the shape
    {\"times\": [{\"time\": 0.0,
                \"intervals\": [{\"interval\": [-1.0, \"inf\"],
                                \"z\": [0.5, 0.0]}]}],
     \"seed\": 42, \"tolerance\": 1e-9}
  An interval is [lower, upper]; upper may be \"inf\". Lower endpoints must
  be finite, intervals at one time pairwise disjoint, and every z inside
  the closed unit disk. Unknown fields are rejected. The optional
  \"z_late\" per interval replaces z on the shifted cluster of `mixing`.

DETERMINISM:
  Every command is a pure function of its flags, config file, and seed;
  outputs are byte-identical across runs and thread counts.

THREADS:
  --threads (or the AIRYLINE_THREADS environment variable) caps worker
  parallelism; the default is the available hardware parallelism.

EXIT CODES:
  0 success; 10 domain; 11 config; 12 accuracy; 13 numeric;
  14 infeasible; 15 io. Errors print as `error[<category>]: <message>`.";

#[derive(Parser)]
#[command(
    name = "airyline",
    version,
    about = "Fredholm determinants, counting statistics, mixing and \
             trace-norm decay experiments for the extended Airy kernel, \
             with Monte Carlo cross-checks",
    after_long_help = AFTER_HELP,
    propagate_version = true
)]
struct Cli {
    /// Cap on worker threads (default: AIRYLINE_THREADS, then all cores)
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Airy function debug values at one point, in full precision
    Airy {
        /// Evaluation point
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
    },
    /// Extended space-time kernel debug value with its error estimate
    Kernel {
        /// First time
        #[arg(long, allow_negative_numbers = true)]
        s: f64,
        /// First space point
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        /// Second time
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
        /// Second space point
        #[arg(long, allow_negative_numbers = true)]
        y: f64,
    },
    /// Generating-function determinant of a configured set of intervals
    Genfun {
        /// JSON config file (see --help)
        #[arg(long)]
        config: PathBuf,
        /// Absolute tolerance override (default: config file, then 1e-9)
        #[arg(long)]
        tol: Option<f64>,
        /// Output path (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output format
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// GUE edge distribution F2 over a grid of arguments
    Tw2 {
        /// Grid start
        #[arg(long, default_value_t = -6.0, allow_negative_numbers = true)]
        from: f64,
        /// Grid end (inclusive)
        #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
        to: f64,
        /// Grid step
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        /// Output path (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output format (csv, json, or an svg line plot)
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Distribution of the point count in one configured interval
    Counts {
        /// JSON config file (see --help)
        #[arg(long)]
        config: PathBuf,
        /// Index of the time entry holding the target interval
        #[arg(long, default_value_t = 0)]
        time_index: usize,
        /// Index of the target interval within its time entry
        #[arg(long, default_value_t = 0)]
        interval_index: usize,
        /// Largest count to report
        #[arg(long, default_value_t = 24)]
        k_max: usize,
        /// Output path (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output format
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Joint-minus-factorized determinant remainder across time shifts
    Mixing {
        /// JSON config file describing the base cluster (see --help)
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated ladder of time shifts, strictly increasing;
        /// every shift must exceed the base cluster's time span
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 4.0, 8.0, 16.0])]
        shifts: Vec<f64>,
        /// Output path (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output format (csv stores determinant real parts; json carries
        /// [re, im] pairs; svg plots |R| against T on log-log axes)
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Trace norms of off-diagonal semigroup blocks across time gaps
    TraceDecay {
        /// Left endpoint of the half-line (a, inf) under observation
        #[arg(long, default_value_t = -4.0, allow_negative_numbers = true)]
        a: f64,
        /// Spectral side of the compression
        #[arg(long, value_enum, default_value = "neg")]
        side: SideArg,
        /// Comma-separated ladder of time gaps, each positive
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 4.0, 8.0, 16.0])]
        ys: Vec<f64>,
        /// Length of the discretization window [a, a + length]
        #[arg(long, default_value_t = 12.0)]
        length: f64,
        /// Quadrature nodes for the singular-value computation
        #[arg(long, default_value_t = 256)]
        nodes: usize,
        /// Output path (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output format (svg plots the norm against y on log-log axes)
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Resample a window of ordered bridges from its conditional law and
    /// test that the ensemble distribution is unchanged
    GibbsCheck {
        /// Number of ordered curves
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Time-grid steps per curve
        #[arg(long, default_value_t = 64)]
        grid: usize,
        /// Monte Carlo sample count
        #[arg(long, default_value_t = 10000)]
        samples: usize,
        /// RNG seed
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Output path for the JSON report (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rescaled largest-eigenvalue samples of the tridiagonal GUE model
    GueEdge {
        /// Matrix dimension
        #[arg(long, default_value_t = 400)]
        n: usize,
        /// Number of samples
        #[arg(long, default_value_t = 200000)]
        samples: usize,
        /// RNG seed
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Output path (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output format
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Check recorded baselines against freshly computed values
    Golden {
        /// Directory of golden JSON files
        #[arg(long, default_value = "golden")]
        dir: PathBuf,
        /// Recompute and rewrite the baselines instead of checking
        #[arg(long)]
        update: bool,
        /// Restrict to one golden set by name
        #[arg(long)]
        only: Option<String>,
    },
}

/// Resolve the worker-thread cap: the flag wins, then AIRYLINE_THREADS,
/// then the library default (all available cores).
fn configure_threads(flag: Option<usize>) -> Result<()> {
    let cap = match flag {
        Some(n) => Some(n),
        None => match std::env::var("AIRYLINE_THREADS") {
            Ok(text) => Some(text.parse::<usize>().map_err(|_| {
                airyline_core::Error::Config(format!(
                    "AIRYLINE_THREADS must be a positive integer, got {text:?}"
                ))
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = cap {
        if n == 0 {
            return Err(airyline_core::Error::Config(
                "the worker-thread cap must be at least 1".into(),
            )
            .into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| {
                Failure::Lib(airyline_core::Error::Config(format!(
                    "cannot configure {n} worker threads: {e}"
                )))
            })?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    configure_threads(cli.threads)?;
    match cli.command {
        Cmd::Airy { x } => commands::airy(x),
        Cmd::Kernel { s, x, t, y } => commands::kernel(s, x, t, y),
        Cmd::Genfun {
            config,
            tol,
            out,
            format,
        } => commands::genfun(&config, tol, out.as_ref(), format),
        Cmd::Tw2 {
            from,
            to,
            step,
            out,
            format,
        } => commands::tw2(from, to, step, out.as_ref(), format),
        Cmd::Counts {
            config,
            time_index,
            interval_index,
            k_max,
            out,
            format,
        } => commands::counts(&config, time_index, interval_index, k_max, out.as_ref(), format),
        Cmd::Mixing {
            config,
            shifts,
            out,
            format,
        } => commands::mixing(&config, &shifts, out.as_ref(), format),
        Cmd::TraceDecay {
            a,
            side,
            ys,
            length,
            nodes,
            out,
            format,
        } => commands::trace_decay(a, side, &ys, length, nodes, out.as_ref(), format),
        Cmd::GibbsCheck {
            k,
            grid,
            samples,
            seed,
            out,
        } => commands::gibbs_check(k, grid, samples, seed, out.as_ref()),
        Cmd::GueEdge {
            n,
            samples,
            seed,
            out,
            format,
        } => commands::gue_edge(n, samples, seed, out.as_ref(), format),
        Cmd::Golden { dir, update, only } => golden::run_golden(&dir, update, only.as_deref()),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(failure) = run(cli) {
        eprintln!("error[{}]: {failure}", failure.category());
        std::process::exit(failure.exit_code());
    }
}
