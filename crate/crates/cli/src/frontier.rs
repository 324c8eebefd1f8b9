//! Frontier sweeps: flow-at-risk versus interdiction budget per risk level,
//! written as CSV. Cells are independent and may run on MEANRISK_THREADS
//! worker threads; output order is deterministic either way.

use std::fs;
use std::path::Path;
use std::time::Instant;

use meanrisk::instgen::parse_instance;
use meanrisk::netflow::max_flow_min_cut;
use meanrisk::{
    binary_local_search, inv_normal_cdf, Error, MeanRiskInstance, NetworkInner, Result,
    SearchConfig,
};

#[derive(Debug, Clone, Copy)]
struct Cell {
    eps_index: usize,
    budget_index: usize,
}

#[derive(Debug, Clone, Copy)]
struct Row {
    raw: f64,
    iterations: usize,
    wall_ms: f64,
}

fn parse_epsilons(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for tok in text.split(',') {
        let tok = tok.trim();
        if tok.is_empty() {
            continue;
        }
        let eps: f64 = tok
            .parse()
            .map_err(|_| Error::argument(format!("invalid epsilon '{tok}'")))?;
        if !(eps > 0.0 && eps <= 0.5) {
            return Err(Error::argument("epsilons must lie in (0, 0.5]"));
        }
        if !out.contains(&eps) {
            out.push(eps);
        }
    }
    if out.is_empty() {
        return Err(Error::argument("at least one epsilon is required"));
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(out)
}

/// Cheapest total interdiction cost that severs the network: the min cut
/// under cost capacities.
fn full_severance_budget(instance: &MeanRiskInstance) -> Result<f64> {
    let network = instance.network().expect("interdiction instance");
    let finite: Vec<f64> = network
        .arcs
        .iter()
        .map(|a| if a.interdictable { a.cost } else { 0.0 })
        .collect();
    let max_cost = finite.iter().cloned().fold(1.0f64, f64::max);
    let sentinel = max_cost * 1e6 * network.arcs.len().max(1) as f64;
    let caps: Vec<f64> = network
        .arcs
        .iter()
        .zip(&finite)
        .map(|(a, &c)| if a.interdictable { c } else { sentinel })
        .collect();
    let (value, _) = max_flow_min_cut(network, &caps)?;
    if value >= sentinel * 0.5 {
        return Err(Error::model(
            "network cannot be fully severed by interdictable arcs",
        ));
    }
    Ok(value)
}

fn solve_cell(instance: &MeanRiskInstance, omega: f64, budget: f64) -> Result<Row> {
    let cell_instance = instance.with_budget(budget)?.with_omega(omega)?;
    let started = Instant::now();
    let minimizer = NetworkInner::new(&cell_instance)?;
    let (raw, iterations) = if omega == 0.0 {
        let (inner, _) = minimizer.cut_riskless(&cell_instance)?;
        (inner.value, 0)
    } else {
        let out = binary_local_search(&cell_instance, &minimizer, &SearchConfig::default())?;
        (out.solution.value, out.iterations)
    };
    Ok(Row {
        raw,
        iterations,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

fn worker_count() -> usize {
    std::env::var("MEANRISK_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(0)
}

pub fn run(instance_path: &Path, epsilons: &str, budget_steps: usize, out: &Path) -> Result<()> {
    if budget_steps == 0 {
        return Err(Error::argument("budget-steps must be >= 1"));
    }
    let text = fs::read_to_string(instance_path)?;
    let (instance, _) = parse_instance(&text)?;
    if instance.network().is_none() {
        return Err(Error::argument(
            "frontier sweeps apply to interdiction instances only",
        ));
    }
    let epsilons = parse_epsilons(epsilons)?;
    let omegas: Vec<f64> = epsilons
        .iter()
        .map(|&eps| inv_normal_cdf(1.0 - eps))
        .collect::<Result<Vec<_>>>()?;
    let beta_max = full_severance_budget(&instance)?;
    let budgets: Vec<f64> = (0..=budget_steps)
        .map(|i| beta_max * i as f64 / budget_steps as f64)
        .collect();

    let cells: Vec<Cell> = (0..epsilons.len())
        .flat_map(|e| {
            (0..budgets.len()).map(move |b| Cell {
                eps_index: e,
                budget_index: b,
            })
        })
        .collect();

    let workers = worker_count();
    let mut rows: Vec<Option<Row>> = vec![None; cells.len()];
    if workers <= 1 {
        for (slot, cell) in rows.iter_mut().zip(&cells) {
            *slot = Some(solve_cell(
                &instance,
                omegas[cell.eps_index],
                budgets[cell.budget_index],
            )?);
        }
    } else {
        let results = std::thread::scope(|scope| -> Result<Vec<Vec<(usize, Row)>>> {
            let mut handles = Vec::new();
            for w in 0..workers {
                let cells = &cells;
                let instance = &instance;
                let omegas = &omegas;
                let budgets = &budgets;
                handles.push(scope.spawn(move || -> Result<Vec<(usize, Row)>> {
                    let mut local = Vec::new();
                    for (idx, cell) in cells.iter().enumerate() {
                        if idx % workers != w {
                            continue;
                        }
                        let row = solve_cell(
                            instance,
                            omegas[cell.eps_index],
                            budgets[cell.budget_index],
                        )?;
                        local.push((idx, row));
                    }
                    Ok(local)
                }));
            }
            handles
                .into_iter()
                .map(|h| h.join().expect("worker thread panicked"))
                .collect()
        })?;
        for batch in results {
            for (idx, row) in batch {
                rows[idx] = Some(row);
            }
        }
    }
    let mut rows: Vec<Row> = rows.into_iter().map(|r| r.expect("cell solved")).collect();

    // A larger budget always admits the smaller budget's interdiction plan,
    // so carry better incumbents forward before asserting monotonicity.
    for e in 0..epsilons.len() {
        for b in 1..budgets.len() {
            let prev = rows[e * budgets.len() + b - 1].raw;
            let cur = &mut rows[e * budgets.len() + b];
            if cur.raw > prev {
                cur.raw = prev;
            }
        }
        for b in 1..budgets.len() {
            assert!(
                rows[e * budgets.len() + b].raw <= rows[e * budgets.len() + b - 1].raw,
                "frontier must be non-increasing in budget"
            );
        }
    }

    // The scale reference is the risk-neutral, no-interdiction solve.
    let base_instance = instance.with_budget(0.0)?.with_omega(0.0)?;
    let minimizer = NetworkInner::new(&base_instance)?;
    let (base, _) = minimizer.cut_riskless(&base_instance)?;
    let raw00 = base.value;
    if !(raw00 > 0.0) {
        return Err(Error::model(
            "deterministic min cut is zero; nothing to scale the frontier against",
        ));
    }

    let mut csv = String::from("budget_fraction,epsilon,scaled,raw,iters,wall_ms\n");
    for (e, &eps) in epsilons.iter().enumerate() {
        for (b, _) in budgets.iter().enumerate() {
            let row = &rows[e * budgets.len() + b];
            let fraction = b as f64 / budget_steps as f64;
            let scaled = 100.0 * (row.raw / raw00);
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                fraction, eps, scaled, row.raw, row.iterations, row.wall_ms
            ));
        }
    }
    fs::write(out, csv)?;
    println!(
        "wrote {} ({} epsilons x {} budgets, beta_max {})",
        out.display(),
        epsilons.len(),
        budgets.len(),
        beta_max
    );
    Ok(())
}
