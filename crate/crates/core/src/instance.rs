//! Problem instances: cost vector, covariance, risk multiplier and a feasible
//! set given either explicitly or through an interdiction network.

use crate::covariance::Covariance;
use crate::error::{Error, Result};
use crate::netflow::Network;
use crate::scalar::Scalar;

/// The binary feasible region.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet<S> {
    /// Materialized list of binary points.
    Explicit(Vec<Vec<u8>>),
    /// Indicators of budget-feasible interdicted cuts of a network; the
    /// decision coordinates are the network's interdictable arcs in order.
    Interdiction(Network<S>),
}

/// A discrete mean-risk minimization instance.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanRiskInstance<S> {
    n: usize,
    c: Vec<S>,
    cov: Covariance<S>,
    omega: S,
    feasible: FeasibleSet<S>,
}

impl<S: Scalar> MeanRiskInstance<S> {
    /// Instance over an explicit point list.
    pub fn explicit(c: Vec<S>, cov: Covariance<S>, omega: S, points: Vec<Vec<u8>>) -> Result<Self> {
        let n = c.len();
        if cov.dim() != n {
            return Err(Error::argument(format!(
                "covariance dimension {} does not match cost dimension {n}",
                cov.dim()
            )));
        }
        if !(omega >= S::zero()) || !omega.is_finite() {
            return Err(Error::argument("omega must be finite and >= 0"));
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::argument("cost vector must be finite"));
        }
        if points.is_empty() {
            return Err(Error::argument("explicit feasible set must be nonempty"));
        }
        for (k, p) in points.iter().enumerate() {
            if p.len() != n {
                return Err(Error::argument(format!("point {k} has wrong dimension")));
            }
            if p.iter().any(|&b| b > 1) {
                return Err(Error::argument(format!("point {k} is not binary")));
            }
        }
        Ok(MeanRiskInstance {
            n,
            c,
            cov,
            omega,
            feasible: FeasibleSet::Explicit(points),
        })
    }

    /// Instance over the interdicted cuts of a network. Costs are the mean
    /// capacities of the interdictable arcs; the covariance must match that
    /// coordinate count.
    pub fn interdiction(network: Network<S>, cov: Covariance<S>, omega: S) -> Result<Self> {
        let ids = network.interdictable_arcs();
        if cov.dim() != ids.len() {
            return Err(Error::argument(format!(
                "covariance dimension {} does not match {} interdictable arcs",
                cov.dim(),
                ids.len()
            )));
        }
        if !(omega >= S::zero()) || !omega.is_finite() {
            return Err(Error::argument("omega must be finite and >= 0"));
        }
        if let Some(q) = cov.diagonal_variances() {
            for (k, &a) in ids.iter().enumerate() {
                if !q[k].close(network.arcs[a].variance, S::of(1e-12)) {
                    return Err(Error::argument(format!(
                        "diagonal variance {k} disagrees with arc {a}"
                    )));
                }
            }
        }
        let c = ids.iter().map(|&a| network.arcs[a].mean).collect();
        Ok(MeanRiskInstance {
            n: ids.len(),
            c,
            cov,
            omega,
            feasible: FeasibleSet::Interdiction(network),
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn cost(&self) -> &[S] {
        &self.c
    }

    #[inline]
    pub fn covariance(&self) -> &Covariance<S> {
        &self.cov
    }

    #[inline]
    pub fn omega(&self) -> S {
        self.omega
    }

    #[inline]
    pub fn feasible(&self) -> &FeasibleSet<S> {
        &self.feasible
    }

    pub fn explicit_points(&self) -> Option<&[Vec<u8>]> {
        match &self.feasible {
            FeasibleSet::Explicit(pts) => Some(pts),
            _ => None,
        }
    }

    pub fn network(&self) -> Option<&Network<S>> {
        match &self.feasible {
            FeasibleSet::Interdiction(net) => Some(net),
            _ => None,
        }
    }

    /// Same instance with a different risk multiplier.
    pub fn with_omega(&self, omega: S) -> Result<Self> {
        if !(omega >= S::zero()) || !omega.is_finite() {
            return Err(Error::argument("omega must be finite and >= 0"));
        }
        let mut inst = self.clone();
        inst.omega = omega;
        Ok(inst)
    }

    /// Same instance with a different interdiction budget (networks only).
    pub fn with_budget(&self, budget: S) -> Result<Self> {
        match &self.feasible {
            FeasibleSet::Interdiction(net) => {
                if !(budget >= S::zero()) {
                    return Err(Error::argument("budget must be >= 0"));
                }
                let mut network = net.clone();
                network.budget = budget;
                let mut inst = self.clone();
                inst.feasible = FeasibleSet::Interdiction(network);
                Ok(inst)
            }
            _ => Err(Error::argument("budget applies to interdiction instances")),
        }
    }
}

/// A feasible point with its objective decomposition and, when produced by
/// the bisection search, the `t` it came from and the certificate gap.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<S> {
    pub x: Vec<u8>,
    pub mean: S,
    pub stdev: S,
    pub value: S,
    /// The `t` whose inner problem produced `x`; absent for exact solves.
    pub t_at: Option<S>,
    /// `(f(t) - value) / f(t)` at the final evaluated `t`, when available.
    pub gap_certificate: Option<S>,
    /// Set when an inner solver hit its node budget and the value is only an
    /// upper bound on the true inner minimum.
    pub approximate: bool,
}

impl<S: Scalar> Solution<S> {
    pub fn from_point(instance: &MeanRiskInstance<S>, x: Vec<u8>) -> Result<Self> {
        if x.len() != instance.dim() {
            return Err(Error::argument("solution dimension mismatch"));
        }
        let mean = crate::objective::dot_binary(instance.cost(), &x);
        let stdev = instance.covariance().quad_form_binary(&x).max(S::zero()).sqrt();
        let value = mean + instance.omega() * stdev;
        Ok(Solution {
            x,
            mean,
            stdev,
            value,
            t_at: None,
            gap_certificate: None,
            approximate: false,
        })
    }

    pub fn with_certificate(mut self, t_at: S, gap: S) -> Self {
        self.t_at = Some(t_at);
        self.gap_certificate = Some(gap);
        self
    }
}
