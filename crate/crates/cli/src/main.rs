//! Command line for mean-risk interdiction: instance generation, bisection
//! solves, desk-scale exact references, and efficient-frontier sweeps.

mod frontier;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use meanrisk::Error;

#[derive(Parser)]
#[command(name = "meanrisk", version, about = "Discrete mean-risk minimization and stochastic network interdiction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a grid interdiction instance
    Gen {
        /// Grid rows (q)
        #[arg(long)]
        rows: usize,
        /// Grid columns (p)
        #[arg(long)]
        cols: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Factor-model covariance instead of independent capacities
        #[arg(long)]
        correlated: bool,
        /// Factor count for correlated instances
        #[arg(long, default_value_t = 20)]
        factors: usize,
        /// Risk level in (0, 0.5]
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        /// half-rows | eta:<k> | beta:<value>
        #[arg(long, default_value = "half-rows")]
        budget_rule: String,
        /// Interdiction costs are integral uniform on [r, 3r]
        #[arg(long, default_value_t = 1)]
        cost_scale: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve an instance with the bisection search
    Solve {
        #[arg(long)]
        instance: PathBuf,
        /// Relative-gap stopping tolerance
        #[arg(long, default_value_t = 0.01)]
        gap: f64,
        #[arg(long, default_value_t = 64)]
        max_iters: usize,
        /// Write the iteration trace as CSV
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write a solution document
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact desk-scale reference solve, paired with a bisection run
    Exact {
        #[arg(long)]
        instance: PathBuf,
        /// Guard on exact-solver work (parametric solves / tree nodes)
        #[arg(long, default_value_t = 1_000_000)]
        node_budget: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep budgets and risk levels into a frontier CSV
    Frontier {
        #[arg(long)]
        instance: PathBuf,
        /// Comma-separated risk levels; 0.5 gives the risk-neutral curve
        #[arg(long, default_value = "0.025,0.05,0.1,0.5")]
        epsilons: String,
        /// Number of budget increments between 0 and full severance
        #[arg(long, default_value_t = 20)]
        budget_steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Argument(_) => 2,
        Error::Model(_) | Error::Parse { .. } | Error::Io(_) => 3,
        Error::Capacity(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen {
            rows,
            cols,
            seed,
            correlated,
            factors,
            epsilon,
            budget_rule,
            cost_scale,
            out,
        } => run::gen(
            rows,
            cols,
            seed,
            correlated,
            factors,
            epsilon,
            &budget_rule,
            cost_scale,
            &out,
        ),
        Command::Solve {
            instance,
            gap,
            max_iters,
            trace,
            out,
        } => run::solve(&instance, gap, max_iters, trace.as_deref(), out.as_deref()),
        Command::Exact {
            instance,
            node_budget,
            out,
        } => run::exact(&instance, node_budget, out.as_deref()),
        Command::Frontier {
            instance,
            epsilons,
            budget_steps,
            out,
        } => frontier::run(&instance, &epsilons, budget_steps, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
