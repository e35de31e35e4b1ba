#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use graphmom::sdpsolver::SolverConfig;
use graphmom::{Error, Result};

use commands::Context;

/// Graph recovery from partial moments: completion hierarchies and kernel
/// extraction.
#[derive(Parser)]
#[command(name = "graphmom", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Solver tolerance for fixings and PSD-ness (gap uses 10x).
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Seed for randomized checks; recorded, otherwise unused.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute known moments from the spec's source.
    Moments {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_parser = parse_orders)]
        order: Option<(usize, usize)>,
        /// Total degree to compute, at least; overrides the order range.
        #[arg(long)]
        degree_cap: Option<usize>,
    },
    /// Complete moments over a range of orders.
    Complete {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_parser = parse_orders)]
        order: Option<(usize, usize)>,
    },
    /// Transport lower bounds from marginal moments.
    Transport {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_parser = parse_orders)]
        order: Option<(usize, usize)>,
    },
    /// Extract a graph with the Christoffel-Darboux kernel.
    Reconstruct {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_parser = parse_orders)]
        order: Option<(usize, usize)>,
    },
    /// Run a built-in experiment: convex-ot, nonconvex-ot,
    /// linear-measurements, step-vs-l2 or lmoment.
    Demo {
        name: String,
        #[arg(long, value_parser = parse_orders)]
        order: Option<(usize, usize)>,
    },
}

/// `a..b` or a single order `a`.
fn parse_orders(s: &str) -> std::result::Result<(usize, usize), String> {
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|e| format!("bad order {t:?}: {e}"))
    };
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
        None => {
            let a = parse(s)?;
            (a, a)
        }
    };
    if a > b {
        return Err(format!("empty order range {a}..{b}"));
    }
    Ok((a, b))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Usage(_) | Error::Degree { .. } | Error::Data(_) | Error::Io(_) | Error::Json(_) => {
            2
        }
        Error::Solver(_) | Error::Numerical(_) => 3,
        Error::Accuracy { .. } => 4,
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = SolverConfig::default();
    if let Some(t) = cli.tol {
        if !(t > 0.0) {
            return Err(Error::usage("--tol must be positive"));
        }
        cfg.tol_eq = t;
        cfg.tol_psd = t;
        cfg.tol_gap = 10.0 * t;
    }
    if cli.verbose {
        if let Some(s) = cli.seed {
            eprintln!("seed {s}");
        }
    }
    let ctx = Context {
        out: cli.out,
        cfg,
        verbose: cli.verbose,
    };
    match cli.cmd {
        Cmd::Moments {
            spec,
            order,
            degree_cap,
        } => commands::moments(&spec::load(&spec)?, order, degree_cap, &ctx),
        Cmd::Complete { spec, order } => commands::complete(&spec::load(&spec)?, order, &ctx),
        Cmd::Transport { spec, order } => commands::transport(&spec::load(&spec)?, order, &ctx),
        Cmd::Reconstruct { spec, order } => commands::reconstruct(&spec::load(&spec)?, order, &ctx),
        Cmd::Demo { name, order } => commands::demo(&name, order, &ctx),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
