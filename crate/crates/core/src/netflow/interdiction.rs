//! Exact budgeted interdiction for linear arc weights: best-first
//! branch-and-bound over interdiction decisions, with a relaxation that
//! zeroes every still-affordable undecided arc.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::maxflow::solve_min_cut;
use super::{CutSolution, Network};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ZState {
    Undecided,
    Interdicted,
    Kept,
}

struct Node<S> {
    bound: S,
    depth: usize,
    seq: u64,
    zstate: Vec<ZState>,
    budget_used: S,
}

impl<S: Scalar> PartialEq for Node<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_key(other) == Ordering::Equal
    }
}
impl<S: Scalar> Eq for Node<S> {}
impl<S: Scalar> PartialOrd for Node<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<S: Scalar> Ord for Node<S> {
    // BinaryHeap is a max-heap; invert so the lowest bound pops first,
    // deeper nodes break ties, then insertion order.
    fn cmp(&self, other: &Self) -> Ordering {
        other.cmp_key(self)
    }
}

impl<S: Scalar> Node<S> {
    fn cmp_key(&self, other: &Self) -> Ordering {
        self.bound
            .partial_cmp(&other.bound)
            .expect("bounds are never NaN")
            .then(other.depth.cmp(&self.depth))
            .then(self.seq.cmp(&other.seq))
    }
}

fn zeroed_caps<S: Scalar>(
    network: &Network<S>,
    capacities: &[S],
    zstate: &[ZState],
    remaining: S,
    budget_eps: S,
) -> Vec<S> {
    network
        .arcs
        .iter()
        .enumerate()
        .map(|(i, a)| {
            if !a.interdictable {
                return capacities[i];
            }
            match zstate[i] {
                ZState::Interdicted => S::zero(),
                ZState::Kept => capacities[i],
                ZState::Undecided => {
                    if a.cost <= remaining + budget_eps {
                        S::zero()
                    } else {
                        capacities[i]
                    }
                }
            }
        })
        .collect()
}

fn crossing_arcs<S: Scalar>(network: &Network<S>, side: &[bool]) -> Vec<usize> {
    network
        .arcs
        .iter()
        .enumerate()
        .filter(|(_, a)| side[a.tail] && !side[a.head])
        .map(|(i, _)| i)
        .collect()
}

fn build_cut<S: Scalar>(
    network: &Network<S>,
    capacities: &[S],
    interdicted_flags: &[bool],
) -> CutSolution<S> {
    let caps: Vec<S> = capacities
        .iter()
        .enumerate()
        .map(|(i, &c)| if interdicted_flags[i] { S::zero() } else { c })
        .collect();
    let (_, side) = solve_min_cut(network, &caps, None);
    let cut_arcs = crossing_arcs(network, &side);
    let mut interdicted = Vec::new();
    let mut residual = S::zero();
    for &a in &cut_arcs {
        if interdicted_flags[a] {
            interdicted.push(a);
        } else {
            residual += capacities[a];
        }
    }
    CutSolution {
        source_side: side,
        cut_arcs,
        interdicted,
        residual_value: residual,
    }
}

/// Greedy incumbent: repeatedly interdict the current min cut's arcs in
/// decreasing capacity-per-cost order within budget, until a fixed point.
pub(crate) fn greedy_interdiction<S: Scalar>(
    network: &Network<S>,
    capacities: &[S],
    zstate: &[ZState],
    budget: S,
    budget_used: S,
    budget_eps: S,
) -> CutSolution<S> {
    let mut flags: Vec<bool> = zstate.iter().map(|z| *z == ZState::Interdicted).collect();
    let mut remaining = budget - budget_used;
    for _round in 0..network.arcs.len() {
        let caps: Vec<S> = capacities
            .iter()
            .enumerate()
            .map(|(i, &c)| if flags[i] { S::zero() } else { c })
            .collect();
        let (_, side) = solve_min_cut(network, &caps, None);
        let mut candidates: Vec<usize> = crossing_arcs(network, &side)
            .into_iter()
            .filter(|&a| {
                network.arcs[a].interdictable
                    && !flags[a]
                    && zstate[a] != ZState::Kept
                    && network.arcs[a].cost <= remaining + budget_eps
            })
            .collect();
        candidates.sort_by(|&a, &b| {
            let ra = capacities[a] / network.arcs[a].cost;
            let rb = capacities[b] / network.arcs[b].cost;
            rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
        });
        let mut added = false;
        for a in candidates {
            if network.arcs[a].cost <= remaining + budget_eps {
                flags[a] = true;
                remaining = remaining - network.arcs[a].cost;
                added = true;
            }
        }
        if !added {
            break;
        }
    }
    build_cut(network, capacities, &flags)
}

/// Globally minimal residual cut value under an interdiction budget.
///
/// Lower bounds zero every undecided arc that still fits the remaining
/// budget (removing more arcs can only shrink the min cut), branching
/// follows the largest-capacity undecided arc inside the bound's cut, and
/// nodes close exactly once that cut no longer contains undecided arcs.
pub fn interdiction_inner<S: Scalar>(
    network: &Network<S>,
    capacities: &[S],
    budget: S,
) -> Result<CutSolution<S>> {
    if !(budget >= S::zero()) {
        return Err(Error::argument("budget must be >= 0"));
    }
    if capacities.len() != network.arcs.len() {
        return Err(Error::argument("one capacity per arc required"));
    }
    for (i, a) in network.arcs.iter().enumerate() {
        if a.interdictable && !capacities[i].is_finite() {
            return Err(Error::argument(format!(
                "arc {i}: interdictable arcs need finite capacity"
            )));
        }
    }
    let budget_eps = S::of(1e-9) * (S::one() + budget.abs());
    let prune_eps = S::of(1e-9);
    let root_state = vec![ZState::Undecided; network.arcs.len()];

    let mut incumbent = greedy_interdiction(
        network,
        capacities,
        &root_state,
        budget,
        S::zero(),
        budget_eps,
    );

    let mut heap: BinaryHeap<Node<S>> = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(Node {
        bound: S::neg_infinity(),
        depth: 0,
        seq,
        zstate: root_state,
        budget_used: S::zero(),
    });

    let mut pops = 0u64;
    while let Some(node) = heap.pop() {
        pops += 1;
        if pops > 20_000_000 {
            return Err(Error::capacity(
                "interdiction search exceeded its node limit",
            ));
        }
        if node.bound >= incumbent.residual_value - prune_eps {
            continue;
        }
        let remaining = budget - node.budget_used;
        let caps = zeroed_caps(network, capacities, &node.zstate, remaining, budget_eps);
        let (value, side) = solve_min_cut(network, &caps, None);
        if value >= incumbent.residual_value - prune_eps {
            continue;
        }
        let cut = crossing_arcs(network, &side);
        let undecided: Vec<usize> = cut
            .iter()
            .copied()
            .filter(|&a| {
                network.arcs[a].interdictable
                    && node.zstate[a] == ZState::Undecided
                    && network.arcs[a].cost <= remaining + budget_eps
            })
            .collect();
        if undecided.is_empty() {
            // Every zeroed arc in this cut is actually interdicted, so the
            // relaxed value is attained by a feasible solution.
            let flags: Vec<bool> = node
                .zstate
                .iter()
                .map(|z| *z == ZState::Interdicted)
                .collect();
            let candidate = build_cut(network, capacities, &flags);
            if candidate.residual_value < incumbent.residual_value {
                incumbent = candidate;
            }
            continue;
        }
        let branch = undecided
            .iter()
            .copied()
            .max_by(|&a, &b| {
                capacities[a]
                    .partial_cmp(&capacities[b])
                    .unwrap()
                    .then(b.cmp(&a))
            })
            .expect("nonempty undecided list");

        let mut interdict_state = node.zstate.clone();
        interdict_state[branch] = ZState::Interdicted;
        seq += 1;
        heap.push(Node {
            bound: value,
            depth: node.depth + 1,
            seq,
            zstate: interdict_state,
            budget_used: node.budget_used + network.arcs[branch].cost,
        });

        let mut keep_state = node.zstate;
        keep_state[branch] = ZState::Kept;
        seq += 1;
        heap.push(Node {
            bound: value,
            depth: node.depth + 1,
            seq,
            zstate: keep_state,
            budget_used: node.budget_used,
        });
    }
    Ok(incumbent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netflow::max_flow_min_cut;
    use crate::netflow::NetArc;

    fn arc(tail: usize, head: usize, cap: f64, cost: f64) -> NetArc<f64> {
        NetArc {
            tail,
            head,
            mean: cap,
            variance: 0.0,
            cost,
            interdictable: true,
        }
    }

    fn two_arc(caps: [f64; 2]) -> (Network<f64>, Vec<f64>) {
        let network = Network::new(
            2,
            0,
            1,
            vec![arc(0, 1, caps[0], 1.0), arc(0, 1, caps[1], 1.0)],
            1.0,
        )
        .unwrap();
        let c = caps.to_vec();
        (network, c)
    }

    #[test]
    fn deterministic_case_interdicts_the_larger_arc() {
        let (network, caps) = two_arc([1.0, 0.9]);
        let cut = interdiction_inner(&network, &caps, 1.0).unwrap();
        assert_eq!(cut.interdicted, vec![0]);
        assert!((cut.residual_value - 0.9).abs() < 1e-12);
    }

    #[test]
    fn effective_capacities_flip_the_choice() {
        // With the variance folded in, arc 2 weighs 1.15 and gets removed.
        let (network, _) = two_arc([1.0, 0.9]);
        let caps = vec![1.0, 1.15];
        let cut = interdiction_inner(&network, &caps, 1.0).unwrap();
        assert_eq!(cut.interdicted, vec![1]);
        assert!((cut.residual_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_budget_reduces_to_min_cut() {
        let (network, caps) = two_arc([1.0, 0.9]);
        let cut = interdiction_inner(&network, &caps, 0.0).unwrap();
        let (flow, _) = max_flow_min_cut(&network, &caps).unwrap();
        assert_eq!(cut.residual_value, flow);
        assert!(cut.interdicted.is_empty());
    }

    #[test]
    fn negative_budget_is_an_argument_error() {
        let (network, caps) = two_arc([1.0, 0.9]);
        assert!(interdiction_inner(&network, &caps, -1.0).is_err());
    }

    fn grid_network(p: usize, q: usize, seed: u64) -> (Network<f64>, Vec<f64>) {
        let mut state = seed;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 33) % 1000) as f64 / 1000.0
        };
        let node = |i: usize, j: usize| 1 + i * q + j;
        let source = 0;
        let sink = 1 + p * q;
        let mut arcs = Vec::new();
        let sentinel = 1e7;
        for j in 0..q {
            arcs.push(NetArc {
                tail: source,
                head: node(0, j),
                mean: sentinel,
                variance: 0.0,
                cost: 1.0,
                interdictable: false,
            });
        }
        for i in 0..p - 1 {
            for j in 0..q {
                arcs.push(arc(node(i, j), node(i + 1, j), (1.0 + next() * 9.0).floor(), (1.0 + next() * 2.0).floor()));
            }
        }
        for i in 0..p {
            for j in 0..q - 1 {
                let (a, b) = if next() < 0.5 {
                    (node(i, j), node(i, j + 1))
                } else {
                    (node(i, j + 1), node(i, j))
                };
                arcs.push(arc(a, b, (1.0 + next() * 9.0).floor(), (1.0 + next() * 2.0).floor()));
            }
        }
        for j in 0..q {
            arcs.push(NetArc {
                tail: node(p - 1, j),
                head: sink,
                mean: sentinel,
                variance: 0.0,
                cost: 1.0,
                interdictable: false,
            });
        }
        let network = Network::new(2 + p * q, source, sink, arcs, 0.0).unwrap();
        let caps: Vec<f64> = network.arcs.iter().map(|a| a.mean).collect();
        (network, caps)
    }

    /// Exhaustive oracle: all source sets, best interdiction per cut.
    fn brute_interdiction(network: &Network<f64>, caps: &[f64], budget: f64) -> f64 {
        let internal: Vec<usize> = (0..network.node_count)
            .filter(|&v| v != network.source && v != network.sink)
            .collect();
        let mut best = f64::INFINITY;
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
                continue; // sentinel arcs make this cut infinite
            }
            let total: f64 = cut.iter().map(|&a| caps[a]).sum();
            // DFS over interdiction subsets with budget pruning.
            fn dfs(
                cut: &[usize],
                idx: usize,
                remaining: f64,
                removed: f64,
                network: &Network<f64>,
                caps: &[f64],
                best_removed: &mut f64,
            ) {
                if removed > *best_removed {
                    *best_removed = removed;
                }
                if idx == cut.len() {
                    return;
                }
                dfs(cut, idx + 1, remaining, removed, network, caps, best_removed);
                let a = cut[idx];
                if network.arcs[a].cost <= remaining + 1e-9 {
                    dfs(
                        cut,
                        idx + 1,
                        remaining - network.arcs[a].cost,
                        removed + caps[a],
                        network,
                        caps,
                        best_removed,
                    );
                }
            }
            let mut removed = 0.0;
            dfs(&cut, 0, budget, 0.0, network, caps, &mut removed);
            best = best.min(total - removed);
        }
        best
    }

    #[test]
    fn matches_exhaustive_enumeration_on_small_grids() {
        for seed in 0..10u64 {
            let (network, caps) = grid_network(2, 3, seed);
            for budget in 0..6 {
                let b = budget as f64;
                let cut = interdiction_inner(&network, &caps, b).unwrap();
                let brute = brute_interdiction(&network, &caps, b);
                assert!(
                    (cut.residual_value - brute).abs() <= 1e-9 * brute.max(1.0),
                    "seed {seed} budget {b}: {} vs {brute}",
                    cut.residual_value
                );
                let spent: f64 = cut.interdicted.iter().map(|&a| network.arcs[a].cost).sum();
                assert!(spent <= b + 1e-9);
            }
        }
    }

    #[test]
    fn value_is_monotone_in_budget() {
        for seed in 20..25u64 {
            let (network, caps) = grid_network(3, 3, seed);
            let mut prev = f64::INFINITY;
            for budget in 0..10 {
                let cut = interdiction_inner(&network, &caps, budget as f64).unwrap();
                assert!(
                    cut.residual_value <= prev + 1e-9,
                    "seed {seed} budget {budget}"
                );
                prev = cut.residual_value;
            }
        }
    }
}
