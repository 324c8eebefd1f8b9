//! Shortest-augmenting-path / blocking-flow max flow over floating-point
//! capacities, with the min cut read off the final residual graph.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{CutSolution, Network};

/// Node-side forcing for constrained min cuts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Side {
    Free,
    Source,
    Sink,
}

#[derive(Debug, Clone)]
struct FlowEdge<S> {
    to: usize,
    residual: S,
}

pub(crate) struct FlowGraph<S> {
    nodes: usize,
    edges: Vec<FlowEdge<S>>,
    adj: Vec<Vec<usize>>,
    tol: S,
}

impl<S: Scalar> FlowGraph<S> {
    pub(crate) fn new(nodes: usize, tol: S) -> Self {
        FlowGraph {
            nodes,
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
            tol,
        }
    }

    /// Returns the forward edge index; the reverse edge is `index ^ 1`.
    pub(crate) fn add_edge(&mut self, from: usize, to: usize, cap: S) -> usize {
        let id = self.edges.len();
        self.edges.push(FlowEdge { to, residual: cap });
        self.adj[from].push(id);
        self.edges.push(FlowEdge {
            to: from,
            residual: S::zero(),
        });
        self.adj[to].push(id + 1);
        id
    }

    fn bfs_levels(&self, s: usize, t: usize, level: &mut [i32]) -> bool {
        level.fill(-1);
        level[s] = 0;
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &eid in &self.adj[u] {
                let e = &self.edges[eid];
                if e.residual > self.tol && level[e.to] < 0 {
                    level[e.to] = level[u] + 1;
                    queue.push_back(e.to);
                }
            }
        }
        level[t] >= 0
    }

    fn dfs_push(
        &mut self,
        u: usize,
        t: usize,
        pushed: S,
        level: &[i32],
        iter: &mut [usize],
    ) -> S {
        if u == t {
            return pushed;
        }
        while iter[u] < self.adj[u].len() {
            let eid = self.adj[u][iter[u]];
            let (to, residual) = {
                let e = &self.edges[eid];
                (e.to, e.residual)
            };
            if residual > self.tol && level[to] == level[u] + 1 {
                let d = self.dfs_push(to, t, pushed.min(residual), level, iter);
                if d > S::zero() {
                    self.edges[eid].residual -= d;
                    self.edges[eid ^ 1].residual += d;
                    return d;
                }
            }
            iter[u] += 1;
        }
        S::zero()
    }

    pub(crate) fn max_flow(&mut self, s: usize, t: usize) -> S {
        let mut total = S::zero();
        let mut level = vec![-1i32; self.nodes];
        while self.bfs_levels(s, t, &mut level) {
            let mut iter = vec![0usize; self.nodes];
            loop {
                let pushed = self.dfs_push(s, t, S::infinity(), &level, &mut iter);
                if pushed <= S::zero() {
                    break;
                }
                total += pushed;
            }
        }
        total
    }

    /// Nodes reachable from `s` in the residual graph.
    pub(crate) fn source_side(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.nodes];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &eid in &self.adj[u] {
                let e = &self.edges[eid];
                if e.residual > self.tol && !seen[e.to] {
                    seen[e.to] = true;
                    stack.push(e.to);
                }
            }
        }
        seen
    }
}

/// Max flow and the corresponding min cut for per-arc capacities.
///
/// With no s-t path the flow is zero and the cut is empty. Capacities are
/// compared with absolute tolerance `1e-9 * max finite capacity`.
pub fn max_flow_min_cut<S: Scalar>(
    network: &Network<S>,
    capacities: &[S],
) -> Result<(S, CutSolution<S>)> {
    if capacities.len() != network.arcs.len() {
        return Err(Error::argument("one capacity per arc required"));
    }
    if capacities.iter().any(|c| *c < S::zero() || c.is_nan()) {
        return Err(Error::argument("capacities must be >= 0"));
    }
    let (value, source_side) = solve_min_cut(network, capacities, None);
    let mut cut_arcs = Vec::new();
    let mut residual_value = S::zero();
    for (i, a) in network.arcs.iter().enumerate() {
        if source_side[a.tail] && !source_side[a.head] {
            cut_arcs.push(i);
            residual_value += capacities[i];
        }
    }
    Ok((
        value,
        CutSolution {
            source_side,
            cut_arcs,
            interdicted: Vec::new(),
            residual_value,
        },
    ))
}

/// Min cut with optional node-side forcings, realized by sentinel-capacity
/// arcs from the source / to the sink. Returns (cut value, source side).
pub(crate) fn solve_min_cut<S: Scalar>(
    network: &Network<S>,
    capacities: &[S],
    forcing: Option<&[Side]>,
) -> (S, Vec<bool>) {
    let scale = network.capacity_scale(capacities);
    let tol = S::of(1e-9) * scale;
    let sentinel = network.capacity_sentinel(capacities);
    let mut g = FlowGraph::new(network.node_count, tol);
    for (a, &cap) in network.arcs.iter().zip(capacities) {
        g.add_edge(a.tail, a.head, cap);
    }
    if let Some(sides) = forcing {
        for (v, side) in sides.iter().enumerate() {
            match side {
                Side::Source if v != network.source => {
                    g.add_edge(network.source, v, sentinel);
                }
                Side::Sink if v != network.sink => {
                    g.add_edge(v, network.sink, sentinel);
                }
                _ => {}
            }
        }
    }
    let value = g.max_flow(network.source, network.sink);
    let side = g.source_side(network.source);
    (value, side)
}

/// Threshold above which a cut value means "only infinite cuts remain".
pub(crate) fn infinite_cut_threshold<S: Scalar>(network: &Network<S>, capacities: &[S]) -> S {
    network.capacity_sentinel(capacities) * S::of(0.5)
}
