//! Desk-scale exact references for interdiction instances: parametric
//! breakpoint enumeration for diagonal covariance, exhaustive enumeration
//! for small correlated networks.

use crate::error::{Error, Result};
use crate::instance::{MeanRiskInstance, Solution};
use crate::objective;
use crate::scalar::Scalar;

use super::interdiction::interdiction_inner;
use super::maxflow::infinite_cut_threshold;
use super::Network;

fn coordinate_dots<S: Scalar>(instance: &MeanRiskInstance<S>, x: &[u8]) -> (S, S) {
    let q = instance
        .covariance()
        .diagonal_variances()
        .expect("diagonal covariance");
    let mean = objective::dot_binary(instance.cost(), x);
    let variance = objective::dot_binary(q, x);
    (mean, variance)
}

/// Linear interdiction solve at weight `c + lambda q`; returns the surviving
/// cut indicator.
fn solve_at_lambda<S: Scalar>(
    instance: &MeanRiskInstance<S>,
    network: &Network<S>,
    lambda: S,
) -> Result<Vec<u8>> {
    let ids = network.interdictable_arcs();
    let q = instance
        .covariance()
        .diagonal_variances()
        .expect("diagonal covariance");
    let mut caps = vec![S::zero(); network.arcs.len()];
    for (k, &a) in ids.iter().enumerate() {
        caps[a] = network.arcs[a].mean + lambda * q[k];
    }
    // Sentinel on the same scale as the inflated weights, so the infinite-cut
    // threshold stays coherent at every lambda.
    let sentinel = network.capacity_sentinel(&caps);
    for (i, a) in network.arcs.iter().enumerate() {
        if !a.interdictable {
            caps[i] = sentinel;
        }
    }
    let cut = interdiction_inner(network, &caps, network.budget)?;
    if cut.residual_value >= infinite_cut_threshold(network, &caps) {
        return Err(Error::model("network has no finite-capacity cut"));
    }
    Ok(cut.indicator(network))
}

/// Exact mean-risk optimum for a diagonal interdiction instance.
///
/// The inner problem at fixed `t` is linear with weights `c + lambda q`,
/// `lambda = omega / 2t`. Recursively probing line intersections enumerates
/// every optimal solution of the parametric family (the lower envelope), and
/// the mean-risk optimum is attained by one of them; zero-variance optima are
/// covered by a dedicated restricted solve.
pub fn exact_diagonal_interdiction<S: Scalar>(
    instance: &MeanRiskInstance<S>,
    solve_budget: usize,
) -> Result<Solution<S>> {
    let network = instance
        .network()
        .ok_or_else(|| Error::argument("exact reference requires an interdiction instance"))?;
    let q = instance
        .covariance()
        .diagonal_variances()
        .ok_or_else(|| Error::argument("parametric exact solve requires diagonal covariance"))?
        .to_vec();
    let omega = instance.omega();

    let mut candidates: Vec<Vec<u8>> = Vec::new();
    let push = |x: Vec<u8>, candidates: &mut Vec<Vec<u8>>| {
        if !candidates.contains(&x) {
            candidates.push(x);
        }
    };

    // Riskless solve is always a candidate and is the answer when omega = 0
    // or all variances vanish.
    let riskless = {
        let caps = network.mean_capacities();
        let cut = interdiction_inner(network, &caps, network.budget)?;
        if cut.residual_value >= infinite_cut_threshold(network, &caps) {
            return Err(Error::model("network has no finite-capacity cut"));
        }
        cut.indicator(network)
    };
    push(riskless, &mut candidates);

    let total_variance: S = q.iter().copied().sum();
    let min_positive = q
        .iter()
        .copied()
        .filter(|v| *v > S::zero())
        .fold(S::infinity(), S::min);
    if omega > S::zero() && total_variance > S::zero() {
        // Best zero-variance point, when one exists: exclude every arc with
        // positive variance from finite cuts.
        if q.iter().any(|v| *v == S::zero()) {
            let ids = network.interdictable_arcs();
            let finite: Vec<S> = network
                .arcs
                .iter()
                .map(|a| if a.interdictable { a.mean } else { S::zero() })
                .collect();
            let sentinel = network.capacity_sentinel(&finite);
            let mut caps = vec![sentinel; network.arcs.len()];
            for (k, &a) in ids.iter().enumerate() {
                if q[k] == S::zero() {
                    caps[a] = network.arcs[a].mean;
                }
            }
            let cut = interdiction_inner(network, &caps, network.budget)?;
            if cut.residual_value < infinite_cut_threshold(network, &caps) {
                push(cut.indicator(network), &mut candidates);
            }
        }

        let lambda_lo = omega / (S::of(2.0) * total_variance.sqrt());
        let lambda_hi = omega / (S::of(2.0) * min_positive.sqrt());
        let mut solves = 0usize;
        let x_lo = solve_at_lambda(instance, network, lambda_lo)?;
        let x_hi = solve_at_lambda(instance, network, lambda_hi)?;
        push(x_lo.clone(), &mut candidates);
        push(x_hi.clone(), &mut candidates);

        // Eisner-Severance recursion on the concave lower envelope of the
        // lines value(lambda) = c'x + lambda q'x.
        let mut stack = vec![(lambda_lo, x_lo, lambda_hi, x_hi)];
        while let Some((l1, x1, l2, x2)) = stack.pop() {
            let (c1, v1) = coordinate_dots(instance, &x1);
            let (c2, v2) = coordinate_dots(instance, &x2);
            let scale = c1.abs().max(c2.abs()).max(S::one());
            if (v1 - v2).abs() <= S::of(1e-12) * v1.abs().max(S::one()) {
                continue; // same slope: no crossing inside
            }
            let cross = (c2 - c1) / (v1 - v2);
            if !(cross > l1 && cross < l2) {
                continue;
            }
            solves += 1;
            if solves > solve_budget {
                return Err(Error::capacity(format!(
                    "parametric refinement exceeded {solve_budget} solves"
                )));
            }
            let x_mid = solve_at_lambda(instance, network, cross)?;
            let (cm, vm) = coordinate_dots(instance, &x_mid);
            let line = c1 + cross * v1;
            let mid_value = cm + cross * vm;
            if mid_value >= line - S::of(1e-9) * scale {
                continue; // the two lines already form the envelope here
            }
            push(x_mid.clone(), &mut candidates);
            stack.push((l1, x1, cross, x_mid.clone()));
            stack.push((cross, x_mid, l2, x2));
        }
    }

    let mut best: Option<(Vec<u8>, S)> = None;
    for x in candidates {
        let v = objective::mean_risk_value(instance, &x)?;
        let replace = match &best {
            None => true,
            Some((bx, bv)) => v < *bv || (v == *bv && x < *bx),
        };
        if replace {
            best = Some((x, v));
        }
    }
    let (x, _) = best.expect("candidate list is nonempty");
    Solution::from_point(instance, x)
}

/// Exhaustive reference over (source set, interdiction subset) pairs for any
/// covariance. Guarded for desk-scale networks.
pub fn brute_force_interdiction_reference<S: Scalar>(
    instance: &MeanRiskInstance<S>,
) -> Result<Solution<S>> {
    let network = instance
        .network()
        .ok_or_else(|| Error::argument("reference requires an interdiction instance"))?;
    let internal: Vec<usize> = (0..network.node_count)
        .filter(|&v| v != network.source && v != network.sink)
        .collect();
    if internal.len() > 20 {
        return Err(Error::capacity(format!(
            "{} internal nodes exceed the exhaustive guard of 20",
            internal.len()
        )));
    }
    let ids = network.interdictable_arcs();
    let mut coord_of = vec![usize::MAX; network.arcs.len()];
    for (k, &a) in ids.iter().enumerate() {
        coord_of[a] = k;
    }
    let budget_eps = S::of(1e-9) * (S::one() + network.budget.abs());

    let mut best: Option<(Vec<u8>, S)> = None;
    for mask in 0..(1u64 << internal.len()) {
        let mut side = vec![false; network.node_count];
        side[network.source] = true;
        for (b, &v) in internal.iter().enumerate() {
            side[v] = (mask >> b) & 1 == 1;
        }
        let cut: Vec<usize> = network
            .arcs
            .iter()
            .enumerate()
            .filter(|(_, a)| side[a.tail] && !side[a.head])
            .map(|(i, _)| i)
            .collect();
        if cut.iter().any(|&a| !network.arcs[a].interdictable) {
            continue; // infinite-capacity arc in the cut
        }
        if cut.len() > 25 {
            return Err(Error::capacity(
                "cut too wide for exhaustive interdiction enumeration",
            ));
        }
        for sub in 0..(1u64 << cut.len()) {
            let mut cost = S::zero();
            let mut x = vec![0u8; instance.dim()];
            for (bit, &a) in cut.iter().enumerate() {
                if (sub >> bit) & 1 == 1 {
                    cost += network.arcs[a].cost;
                } else {
                    x[coord_of[a]] = 1;
                }
            }
            if cost > network.budget + budget_eps {
                continue;
            }
            let v = objective::mean_risk_value(instance, &x)?;
            let replace = match &best {
                None => true,
                Some((bx, bv)) => v < *bv || (v == *bv && x < *bx),
            };
            if replace {
                best = Some((x, v));
            }
        }
    }
    let (x, _) =
        best.ok_or_else(|| Error::model("network has no finite-capacity cut"))?;
    Solution::from_point(instance, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::Covariance;
    use crate::netflow::NetArc;

    fn arc(tail: usize, head: usize, mean: f64, var: f64, cost: f64) -> NetArc<f64> {
        NetArc {
            tail,
            head,
            mean,
            variance: var,
            cost,
            interdictable: true,
        }
    }

    fn random_diagonal_instance(seed: u64, budget: f64) -> MeanRiskInstance<f64> {
        let mut state = seed;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 33) % 1000) as f64 / 1000.0
        };
        // 2x3 grid without fan arcs: node 0 source, node 5 sink.
        let mut arcs = Vec::new();
        let pairs = [(0, 1), (0, 2), (1, 3), (2, 3), (1, 4), (3, 5), (4, 5), (2, 4)];
        for &(u, v) in &pairs {
            arcs.push(arc(
                u,
                v,
                (1.0 + next() * 9.0).floor(),
                (1.0 + next() * 9.0).floor().powi(2),
                (1.0 + next() * 2.0).floor(),
            ));
        }
        let network = Network::new(6, 0, 5, arcs, budget).unwrap();
        let ids = network.interdictable_arcs();
        let q: Vec<f64> = ids.iter().map(|&a| network.arcs[a].variance).collect();
        let cov = Covariance::diagonal(q).unwrap();
        MeanRiskInstance::interdiction(network, cov, 1.6448536269514722).unwrap()
    }

    #[test]
    fn parametric_exact_matches_exhaustive_reference() {
        for seed in 0..15u64 {
            for budget in [0.0, 1.0, 2.0, 3.0] {
                let inst = random_diagonal_instance(seed, budget);
                let exact = exact_diagonal_interdiction(&inst, 10_000).unwrap();
                let brute = brute_force_interdiction_reference(&inst).unwrap();
                assert!(
                    (exact.value - brute.value).abs() <= 1e-9 * brute.value.abs().max(1.0),
                    "seed {seed} budget {budget}: {} vs {}",
                    exact.value,
                    brute.value
                );
            }
        }
    }

    #[test]
    fn two_point_example_has_global_value() {
        // The two-arc network where the local search stops at the left
        // minimum; the exact solver must find the global one.
        let network = Network::new(
            2,
            0,
            1,
            vec![arc(0, 1, 1.0, 0.0, 1.0), arc(0, 1, 0.9, 0.25, 1.0)],
            1.0,
        )
        .unwrap();
        let cov = Covariance::diagonal(vec![0.0, 0.25]).unwrap();
        let inst = MeanRiskInstance::interdiction(network, cov, 1.0).unwrap();
        let sol = exact_diagonal_interdiction(&inst, 1000).unwrap();
        // Optimal: interdict arc 2 and keep the deterministic arc (value 1.0)
        // versus keeping arc 2 at 0.9 + 0.5 = 1.4... the former wins? No:
        // interdicting arc 1 leaves 0.9 + 1 * 0.5 = 1.4; interdicting arc 2
        // leaves 1.0. The optimum is 0.95 at omega = 0.1 but 1.0 here.
        assert!((sol.value - 1.0).abs() < 1e-12);
        assert_eq!(sol.x, vec![1, 0]);
    }

    #[test]
    fn guard_rejects_large_networks() {
        let mut arcs = Vec::new();
        for v in 1..23 {
            arcs.push(arc(0, v, 1.0, 1.0, 1.0));
            arcs.push(arc(v, 23, 1.0, 1.0, 1.0));
        }
        let network = Network::new(24, 0, 23, arcs, 1.0).unwrap();
        let ids = network.interdictable_arcs();
        let q: Vec<f64> = ids.iter().map(|&a| network.arcs[a].variance).collect();
        let cov = Covariance::diagonal(q).unwrap();
        let inst = MeanRiskInstance::interdiction(network, cov, 1.0).unwrap();
        assert!(matches!(
            brute_force_interdiction_reference(&inst),
            Err(Error::Capacity(_))
        ));
    }
}
