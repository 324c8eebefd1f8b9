//! gen / solve / exact subcommand bodies.

use std::fs;
use std::path::Path;
use std::time::Instant;

use meanrisk::instance::FeasibleSet;
use meanrisk::instgen::{
    generate_grid, parse_instance, serialize_instance, serialize_solution, BudgetRule, GridSpec,
    SolutionDocument,
};
use meanrisk::netflow::{brute_force_interdiction_reference, exact_diagonal_interdiction};
use meanrisk::search::Termination;
use meanrisk::{
    binary_local_search, global_scan, write_trace_csv, BruteForce, Error, MeanRiskInstance,
    NetworkInner, Result, SearchConfig, Solution, TraceRow,
};

fn parse_budget_rule(text: &str) -> Result<BudgetRule> {
    if text == "half-rows" {
        return Ok(BudgetRule::HalfRows);
    }
    if let Some(eta) = text.strip_prefix("eta:") {
        let eta: u32 = eta
            .parse()
            .map_err(|_| Error::argument(format!("invalid eta in budget rule '{text}'")))?;
        return Ok(BudgetRule::MeanCostScaled(eta));
    }
    if let Some(beta) = text.strip_prefix("beta:") {
        let beta: f64 = beta
            .parse()
            .map_err(|_| Error::argument(format!("invalid beta in budget rule '{text}'")))?;
        return Ok(BudgetRule::Explicit(beta));
    }
    Err(Error::argument(format!(
        "budget rule must be one of half-rows, eta:<k>, beta:<value>; found '{text}'"
    )))
}

#[allow(clippy::too_many_arguments)]
pub fn gen(
    rows: usize,
    cols: usize,
    seed: u64,
    correlated: bool,
    factors: usize,
    epsilon: f64,
    budget_rule: &str,
    cost_scale: u32,
    out: &Path,
) -> Result<()> {
    let spec = GridSpec {
        cols,
        rows,
        seed,
        correlated,
        factors,
        epsilon,
        budget_rule: parse_budget_rule(budget_rule)?,
        cost_scale,
    };
    let grid = generate_grid(&spec)?;
    let instance = grid.to_instance()?;
    let text = serialize_instance(&instance, Some(grid.epsilon));
    fs::write(out, text)?;
    let interdictable = grid.network.interdictable_arcs().len();
    println!(
        "wrote {} ({} nodes, {} arcs, {} interdictable, budget {}, omega {})",
        out.display(),
        grid.network.node_count,
        grid.network.arcs.len(),
        interdictable,
        grid.network.budget,
        grid.omega,
    );
    Ok(())
}

pub(crate) struct SolveOutput {
    pub solution: Solution,
    pub iterations: usize,
    pub trace: Vec<TraceRow>,
    pub interdicted: Vec<usize>,
}

pub(crate) fn run_search(instance: &MeanRiskInstance, config: &SearchConfig) -> Result<SolveOutput> {
    match instance.feasible() {
        FeasibleSet::Explicit(_) => {
            if instance.omega() == 0.0 {
                let inner = meanrisk::InnerMinimizer::minimize_riskless(&BruteForce, instance)?;
                let mut solution = Solution::from_point(instance, inner.x)?;
                solution.gap_certificate = Some(0.0);
                Ok(SolveOutput {
                    solution,
                    iterations: 0,
                    trace: Vec::new(),
                    interdicted: Vec::new(),
                })
            } else {
                let out = binary_local_search(instance, &BruteForce, config)?;
                Ok(SolveOutput {
                    solution: out.solution,
                    iterations: out.iterations,
                    trace: out.trace,
                    interdicted: Vec::new(),
                })
            }
        }
        FeasibleSet::Interdiction(_) => {
            let minimizer = NetworkInner::new(instance)?;
            if instance.omega() == 0.0 {
                let (inner, interdicted) = minimizer.cut_riskless(instance)?;
                let mut solution = Solution::from_point(instance, inner.x)?;
                solution.gap_certificate = Some(0.0);
                return Ok(SolveOutput {
                    solution,
                    iterations: 0,
                    trace: Vec::new(),
                    interdicted,
                });
            }
            let out = binary_local_search(instance, &minimizer, config)?;
            let interdicted = match (out.termination, out.solution.t_at) {
                (Termination::Riskless, _) | (_, None) => {
                    minimizer.cut_riskless(instance)?.1
                }
                (_, Some(t)) => minimizer.cut_at(instance, t)?.1,
            };
            Ok(SolveOutput {
                solution: out.solution,
                iterations: out.iterations,
                trace: out.trace,
                interdicted,
            })
        }
    }
}

fn describe(instance: &MeanRiskInstance) -> String {
    match instance.feasible() {
        FeasibleSet::Explicit(points) => {
            format!("explicit, dim {}, {} points", instance.dim(), points.len())
        }
        FeasibleSet::Interdiction(net) => format!(
            "network, {} nodes, {} arcs, {} interdictable, budget {}",
            net.node_count,
            net.arcs.len(),
            instance.dim(),
            net.budget
        ),
    }
}

pub fn solve(
    instance_path: &Path,
    gap: f64,
    max_iters: usize,
    trace_path: Option<&Path>,
    out: Option<&Path>,
) -> Result<()> {
    if max_iters == 0 {
        return Err(Error::argument("max-iters must be >= 1"));
    }
    if !(gap > 0.0 && gap < 1.0) {
        return Err(Error::argument("gap must lie in (0, 1)"));
    }
    let text = fs::read_to_string(instance_path)?;
    let (instance, _epsilon) = parse_instance(&text)?;
    let config = SearchConfig {
        gap_tol: gap,
        max_iters,
        ..SearchConfig::default()
    };
    let started = Instant::now();
    let output = run_search(&instance, &config)?;
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;

    println!("instance: {} ({})", instance_path.display(), describe(&instance));
    println!("iterations: {}", output.iterations);
    println!("value: {}", output.solution.value);
    println!(
        "mean: {}  stdev: {}",
        output.solution.mean, output.solution.stdev
    );
    if let Some(g) = output.solution.gap_certificate {
        println!("local gap: {g}");
    }
    println!("wall ms: {wall_ms:.3}");
    if instance.network().is_some() {
        let ids: Vec<String> = output.interdicted.iter().map(|a| a.to_string()).collect();
        println!("interdicted arcs: {}", ids.join(" "));
    }
    if output.solution.approximate {
        println!("note: inner solves hit the node budget; value is an upper bound");
    }

    if let Some(path) = trace_path {
        let mut buf = Vec::new();
        write_trace_csv(&output.trace, &mut buf)?;
        fs::write(path, buf)?;
    }
    if let Some(path) = out {
        let doc = SolutionDocument::from_solution(
            &output.solution,
            output.iterations,
            wall_ms,
            output.interdicted.clone(),
            trace_path.map(|p| p.display().to_string()),
        );
        fs::write(path, serialize_solution(&doc))?;
    }
    Ok(())
}

/// Interdictable-arc guard for the exact network reference.
const EXACT_ARC_GUARD: usize = 400;

pub fn exact(instance_path: &Path, node_budget: usize, out: Option<&Path>) -> Result<()> {
    let text = fs::read_to_string(instance_path)?;
    let (instance, _epsilon) = parse_instance(&text)?;
    let started = Instant::now();
    let exact_solution = match instance.feasible() {
        FeasibleSet::Explicit(_) => global_scan(&instance, &BruteForce)?,
        FeasibleSet::Interdiction(_) => {
            if instance.dim() > EXACT_ARC_GUARD {
                return Err(Error::capacity(format!(
                    "{} interdictable arcs exceed the exact-reference guard of {EXACT_ARC_GUARD}; \
                     use `solve` for an upper bound with a local gap certificate",
                    instance.dim()
                )));
            }
            if instance.covariance().is_diagonal() {
                exact_diagonal_interdiction(&instance, node_budget)?
            } else {
                brute_force_interdiction_reference(&instance)?
            }
        }
    };
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;
    println!("instance: {} ({})", instance_path.display(), describe(&instance));
    println!("exact value: {}", exact_solution.value);
    println!("wall ms: {wall_ms:.3}");

    if instance.omega() > 0.0 {
        let search = run_search(&instance, &SearchConfig::default())?;
        let gap = (search.solution.value - exact_solution.value) / exact_solution.value.abs().max(1e-300);
        println!(
            "paired search: value {} in {} iterations, optimality gap {}",
            search.solution.value, search.iterations, gap
        );
    }

    if let Some(path) = out {
        let doc = SolutionDocument::from_solution(&exact_solution, 0, wall_ms, Vec::new(), None);
        fs::write(path, serialize_solution(&doc))?;
    }
    Ok(())
}
