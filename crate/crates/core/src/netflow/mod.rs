//! Directed networks with stochastic capacities, max-flow/min-cut, and the
//! budgeted interdiction solvers used as inner minimizers.

mod correlated;
mod exact;
mod inner;
mod interdiction;
mod maxflow;

pub use exact::{brute_force_interdiction_reference, exact_diagonal_interdiction};
pub use inner::{mrni_inner_minimizer, NetworkInner};
pub use interdiction::interdiction_inner;
pub use maxflow::max_flow_min_cut;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One directed arc. Non-interdictable arcs (source/sink fans) carry an
/// infinite mean-capacity marker and never enter interdiction decisions.
#[derive(Debug, Clone, PartialEq)]
pub struct NetArc<S> {
    pub tail: usize,
    pub head: usize,
    /// Mean capacity; `infinity` on non-interdictable fan arcs.
    pub mean: S,
    /// Capacity variance (diagonal part for factor models).
    pub variance: S,
    /// Interdiction cost.
    pub cost: S,
    pub interdictable: bool,
}

/// Directed s-t network with an interdiction budget.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<S> {
    pub node_count: usize,
    pub source: usize,
    pub sink: usize,
    pub arcs: Vec<NetArc<S>>,
    pub budget: S,
}

impl<S: Scalar> Network<S> {
    pub fn new(
        node_count: usize,
        source: usize,
        sink: usize,
        arcs: Vec<NetArc<S>>,
        budget: S,
    ) -> Result<Self> {
        if source == sink {
            return Err(Error::argument("source and sink must differ"));
        }
        if source >= node_count || sink >= node_count {
            return Err(Error::argument("source/sink outside node range"));
        }
        if !(budget >= S::zero()) {
            return Err(Error::argument("budget must be >= 0"));
        }
        for (i, a) in arcs.iter().enumerate() {
            if a.tail >= node_count || a.head >= node_count {
                return Err(Error::argument(format!("arc {i} references unknown node")));
            }
            if a.interdictable {
                if !a.mean.is_finite() || a.mean < S::zero() {
                    return Err(Error::argument(format!(
                        "arc {i}: interdictable arcs need finite mean >= 0"
                    )));
                }
                if !(a.cost > S::zero()) {
                    return Err(Error::argument(format!(
                        "arc {i}: interdiction cost must be > 0"
                    )));
                }
            }
            if !(a.variance >= S::zero()) {
                return Err(Error::argument(format!("arc {i}: variance must be >= 0")));
            }
        }
        Ok(Network {
            node_count,
            source,
            sink,
            arcs,
            budget,
        })
    }

    /// Indices of interdictable arcs, in arc order. Decision-vector
    /// coordinate `k` refers to `interdictable_arcs()[k]`.
    pub fn interdictable_arcs(&self) -> Vec<usize> {
        self.arcs
            .iter()
            .enumerate()
            .filter(|(_, a)| a.interdictable)
            .map(|(i, _)| i)
            .collect()
    }

    /// Largest finite capacity among `caps` on interdictable arcs; at least one.
    /// Scales the float-comparison tolerance and the infinity stand-in.
    pub(crate) fn capacity_scale(&self, caps: &[S]) -> S {
        let mut scale = S::zero();
        for (arc, &c) in self.arcs.iter().zip(caps) {
            if arc.interdictable && c.is_finite() {
                scale = scale.max(c.abs());
            }
        }
        if scale == S::zero() {
            for &c in caps {
                if c.is_finite() {
                    scale = scale.max(c.abs());
                }
            }
        }
        scale.max(S::one())
    }

    /// Finite stand-in for "infinite" capacity, large enough that any cut
    /// containing such an arc dominates every finite cut.
    pub(crate) fn capacity_sentinel(&self, caps: &[S]) -> S {
        self.capacity_scale(caps) * S::of(1e6) * S::of(self.arcs.len().max(1) as f64)
    }

    /// Raw mean capacities with the sentinel substituted on fan arcs.
    pub fn mean_capacities(&self) -> Vec<S> {
        let finite: Vec<S> = self
            .arcs
            .iter()
            .map(|a| if a.mean.is_finite() { a.mean } else { S::zero() })
            .collect();
        let sentinel = self.capacity_sentinel(&finite);
        self.arcs
            .iter()
            .map(|a| if a.mean.is_finite() { a.mean } else { sentinel })
            .collect()
    }

    /// Drop nodes that lie on no s-t path. Returns the cleaned network and,
    /// per original arc, its new index (None when removed).
    pub fn prune(&self) -> (Network<S>, Vec<Option<usize>>) {
        let fwd = self.reach(self.source, false);
        let bwd = self.reach(self.sink, true);
        let keep: Vec<bool> = (0..self.node_count).map(|v| fwd[v] && bwd[v]).collect();
        let mut remap = vec![usize::MAX; self.node_count];
        let mut next = 0;
        for v in 0..self.node_count {
            if keep[v] {
                remap[v] = next;
                next += 1;
            }
        }
        let mut arc_map = vec![None; self.arcs.len()];
        let mut arcs = Vec::new();
        for (i, a) in self.arcs.iter().enumerate() {
            if keep[a.tail] && keep[a.head] {
                arc_map[i] = Some(arcs.len());
                let mut na = a.clone();
                na.tail = remap[a.tail];
                na.head = remap[a.head];
                arcs.push(na);
            }
        }
        let net = Network {
            node_count: next,
            source: remap[self.source],
            sink: remap[self.sink],
            arcs,
            budget: self.budget,
        };
        (net, arc_map)
    }

    fn reach(&self, start: usize, reverse: bool) -> Vec<bool> {
        let mut seen = vec![false; self.node_count];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            for a in &self.arcs {
                let (from, to) = if reverse { (a.head, a.tail) } else { (a.tail, a.head) };
                if from == v && !seen[to] {
                    seen[to] = true;
                    stack.push(to);
                }
            }
        }
        seen
    }
}

/// A cut with an interdiction choice on its arcs.
#[derive(Debug, Clone, PartialEq)]
pub struct CutSolution<S> {
    /// Node membership of the source side (contains the source, not the sink).
    pub source_side: Vec<bool>,
    /// Arcs crossing from source side to sink side, ascending by index.
    pub cut_arcs: Vec<usize>,
    /// Interdicted subset of `cut_arcs`, ascending by index.
    pub interdicted: Vec<usize>,
    /// Capacity left on the non-interdicted cut arcs.
    pub residual_value: S,
}

impl<S: Scalar> CutSolution<S> {
    /// Decision vector over interdictable coordinates: 1 for cut arcs that
    /// survive interdiction.
    pub fn indicator(&self, network: &Network<S>) -> Vec<u8> {
        let ids = network.interdictable_arcs();
        let mut coord_of = vec![usize::MAX; network.arcs.len()];
        for (k, &a) in ids.iter().enumerate() {
            coord_of[a] = k;
        }
        let mut x = vec![0u8; ids.len()];
        for &a in &self.cut_arcs {
            if self.interdicted.binary_search(&a).is_err() && coord_of[a] != usize::MAX {
                x[coord_of[a]] = 1;
            }
        }
        x
    }
}

/// Per-arc weights of the fixed-`t` inner problem with independent capacities:
/// `c_a + (omega / 2t) * variance_a`, with the sentinel on fan arcs.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveCapacities<S> {
    pub values: Vec<S>,
}

impl<S: Scalar> EffectiveCapacities<S> {
    pub fn new(network: &Network<S>, omega: S, t: S) -> Result<Self> {
        if !(t > S::zero()) {
            return Err(Error::argument("effective capacities require t > 0"));
        }
        let coef = omega / (S::of(2.0) * t);
        let finite: Vec<S> = network
            .arcs
            .iter()
            .map(|a| {
                if a.interdictable {
                    a.mean + coef * a.variance
                } else {
                    S::zero()
                }
            })
            .collect();
        let sentinel = network.capacity_sentinel(&finite);
        let values = network
            .arcs
            .iter()
            .zip(&finite)
            .map(|(a, &c)| if a.interdictable { c } else { sentinel })
            .collect();
        Ok(EffectiveCapacities { values })
    }
}
