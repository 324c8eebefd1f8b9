//! Inner minimization over interdicted cuts when capacities are correlated:
//! best-first branch-and-bound over interdiction decisions and node sides,
//! bounded by a uniform-diagonal linearization and closed by exact quadratic
//! evaluation at candidate cuts.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::Result;
use crate::instance::MeanRiskInstance;
use crate::scalar::Scalar;

use super::interdiction::ZState;
use super::maxflow::{infinite_cut_threshold, solve_min_cut, Side};
use super::Network;

struct CNode<S> {
    bound: S,
    depth: usize,
    seq: u64,
    zstate: Vec<ZState>,
    sides: Vec<Side>,
    budget_used: S,
}

impl<S: Scalar> PartialEq for CNode<S> {
    fn eq(&self, other: &Self) -> bool {
        self.key(other) == Ordering::Equal
    }
}
impl<S: Scalar> Eq for CNode<S> {}
impl<S: Scalar> PartialOrd for CNode<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<S: Scalar> Ord for CNode<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        other.key(self)
    }
}
impl<S: Scalar> CNode<S> {
    fn key(&self, other: &Self) -> Ordering {
        self.bound
            .partial_cmp(&other.bound)
            .expect("bounds are never NaN")
            .then(other.depth.cmp(&self.depth))
            .then(self.seq.cmp(&other.seq))
    }
}

pub(crate) struct CorrelatedOutcome<S> {
    pub x: Vec<u8>,
    pub value: S,
    pub exact: bool,
    pub interdicted: Vec<usize>,
}

/// Exact surrogate value of the indicator of `survivors`.
fn exact_g<S: Scalar>(
    instance: &MeanRiskInstance<S>,
    coord_of: &[usize],
    survivors: &[usize],
    t: S,
) -> (Vec<u8>, S) {
    let mut x = vec![0u8; instance.dim()];
    for &a in survivors {
        if coord_of[a] != usize::MAX {
            x[coord_of[a]] = 1;
        }
    }
    let mean = crate::objective::dot_binary(instance.cost(), &x);
    let quad = instance.covariance().quad_form_binary(&x);
    let half_omega = S::of(0.5) * instance.omega();
    let g = mean + half_omega * quad / t + half_omega * t;
    (x, g)
}

/// Branch-and-bound for `min g(x, t)` over interdicted cuts with a
/// non-diagonal covariance. `delta` must certify `Q - delta I` PSD so the
/// linearized weights under-estimate `g` on binaries. Exact while the node
/// budget lasts; afterwards the incumbent is returned with `exact = false`.
pub(crate) fn correlated_inner<S: Scalar>(
    instance: &MeanRiskInstance<S>,
    network: &Network<S>,
    t: S,
    delta: S,
    node_budget: usize,
) -> Result<CorrelatedOutcome<S>> {
    let coef = instance.omega() / (S::of(2.0) * t);
    let half_omega_t = S::of(0.5) * instance.omega() * t;
    let budget = network.budget;
    let budget_eps = S::of(1e-9) * (S::one() + budget.abs());
    let prune_eps = S::of(1e-9);

    let ids = network.interdictable_arcs();
    let mut coord_of = vec![usize::MAX; network.arcs.len()];
    for (k, &a) in ids.iter().enumerate() {
        coord_of[a] = k;
    }

    // Linearized weights: exact mean plus the extracted uniform diagonal.
    let finite: Vec<S> = network
        .arcs
        .iter()
        .map(|a| {
            if a.interdictable {
                a.mean + coef * delta
            } else {
                S::zero()
            }
        })
        .collect();
    let sentinel = network.capacity_sentinel(&finite);
    let weights: Vec<S> = network
        .arcs
        .iter()
        .zip(&finite)
        .map(|(a, &w)| if a.interdictable { w } else { sentinel })
        .collect();
    let infinite = infinite_cut_threshold(network, &weights);

    let mut incumbent: Option<(Vec<u8>, S, Vec<usize>)> = None;
    let mut seq = 0u64;
    let mut heap: BinaryHeap<CNode<S>> = BinaryHeap::new();
    let mut root_sides = vec![Side::Free; network.node_count];
    root_sides[network.source] = Side::Source;
    root_sides[network.sink] = Side::Sink;
    heap.push(CNode {
        bound: S::neg_infinity(),
        depth: 0,
        seq,
        zstate: vec![ZState::Undecided; network.arcs.len()],
        sides: root_sides,
        budget_used: S::zero(),
    });

    let mut pops = 0usize;
    let mut exact = true;
    while let Some(node) = heap.pop() {
        pops += 1;
        if pops > node_budget {
            exact = false;
            break;
        }
        if let Some((_, inc, _)) = &incumbent {
            if node.bound >= *inc - prune_eps {
                continue;
            }
        }
        let remaining = budget - node.budget_used;
        let caps: Vec<S> = network
            .arcs
            .iter()
            .enumerate()
            .map(|(i, a)| {
                if !a.interdictable {
                    return weights[i];
                }
                match node.zstate[i] {
                    ZState::Interdicted => S::zero(),
                    ZState::Kept => weights[i],
                    ZState::Undecided => {
                        if a.cost <= remaining + budget_eps {
                            S::zero()
                        } else {
                            weights[i]
                        }
                    }
                }
            })
            .collect();
        let (relaxed, side) = solve_min_cut(network, &caps, Some(&node.sides));
        if relaxed >= infinite {
            continue; // side forcings admit no finite cut
        }
        let bound = relaxed + half_omega_t;
        if let Some((_, inc, _)) = &incumbent {
            if bound >= *inc - prune_eps {
                continue;
            }
        }
        let cut: Vec<usize> = network
            .arcs
            .iter()
            .enumerate()
            .filter(|(_, a)| side[a.tail] && !side[a.head])
            .map(|(i, _)| i)
            .collect();

        // Feasible completion of this node's cut: keep committed removals,
        // then greedily remove affordable undecided arcs by weight per cost.
        let mut removable: Vec<usize> = cut
            .iter()
            .copied()
            .filter(|&a| {
                network.arcs[a].interdictable && node.zstate[a] == ZState::Undecided
                    && network.arcs[a].cost <= remaining + budget_eps
            })
            .collect();
        removable.sort_by(|&a, &b| {
            let ra = weights[a] / network.arcs[a].cost;
            let rb = weights[b] / network.arcs[b].cost;
            rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
        });
        let mut rem = remaining;
        let mut interdicted: Vec<usize> = cut
            .iter()
            .copied()
            .filter(|&a| node.zstate[a] == ZState::Interdicted)
            .collect();
        for &a in &removable {
            if network.arcs[a].cost <= rem + budget_eps {
                interdicted.push(a);
                rem = rem - network.arcs[a].cost;
            }
        }
        interdicted.sort_unstable();
        let survivors: Vec<usize> = cut
            .iter()
            .copied()
            .filter(|a| interdicted.binary_search(a).is_err())
            .collect();
        let (cand_x, cand_g) = exact_g(instance, &coord_of, &survivors, t);
        let better = incumbent
            .as_ref()
            .map(|(_, inc, _)| cand_g < *inc)
            .unwrap_or(true);
        if better {
            incumbent = Some((cand_x, cand_g, interdicted.clone()));
        }

        if !removable.is_empty() {
            // Interdiction branching on the heaviest removable arc.
            let branch = removable
                .iter()
                .copied()
                .max_by(|&a, &b| {
                    weights[a].partial_cmp(&weights[b]).unwrap().then(b.cmp(&a))
                })
                .unwrap();
            let mut interdict_state = node.zstate.clone();
            interdict_state[branch] = ZState::Interdicted;
            seq += 1;
            heap.push(CNode {
                bound,
                depth: node.depth + 1,
                seq,
                zstate: interdict_state,
                sides: node.sides.clone(),
                budget_used: node.budget_used + network.arcs[branch].cost,
            });
            let mut keep_state = node.zstate;
            keep_state[branch] = ZState::Kept;
            seq += 1;
            heap.push(CNode {
                bound,
                depth: node.depth + 1,
                seq,
                zstate: keep_state,
                sides: node.sides,
                budget_used: node.budget_used,
            });
            continue;
        }

        // The relaxed cut is feasibly attained; its exact value is cand_g
        // and the remaining slack is purely quadratic.
        let inc_value = incumbent.as_ref().map(|(_, v, _)| *v).unwrap();
        let slack_tol = S::of(1e-9) * inc_value.abs().max(S::one());
        if cand_g - bound <= slack_tol {
            continue; // bound met: node solved exactly
        }
        // Shrink the quadratic slack by fixing a node side near the cut.
        let free_node = cut
            .iter()
            .flat_map(|&a| [network.arcs[a].head, network.arcs[a].tail])
            .find(|&v| node.sides[v] == Side::Free)
            .or_else(|| (0..network.node_count).find(|&v| node.sides[v] == Side::Free));
        let Some(v) = free_node else {
            continue; // fully assigned: cand_g is this node's exact value
        };
        let mut to_source = node.sides.clone();
        to_source[v] = Side::Source;
        seq += 1;
        heap.push(CNode {
            bound,
            depth: node.depth + 1,
            seq,
            zstate: node.zstate.clone(),
            sides: to_source,
            budget_used: node.budget_used,
        });
        let mut to_sink = node.sides;
        to_sink[v] = Side::Sink;
        seq += 1;
        heap.push(CNode {
            bound,
            depth: node.depth + 1,
            seq,
            zstate: node.zstate,
            sides: to_sink,
            budget_used: node.budget_used,
        });
    }

    let (x, value, interdicted) = incumbent.ok_or_else(|| {
        crate::error::Error::model("network has no finite-capacity cut under the forcings")
    })?;
    Ok(CorrelatedOutcome {
        x,
        value,
        exact,
        interdicted,
    })
}
