//! Inner minimizer for interdiction instances: the diagonal case reduces to
//! a budgeted min cut on effective capacities; correlated covariances go
//! through the combined branch-and-bound.

use crate::error::{Error, Result};
use crate::instance::MeanRiskInstance;
use crate::oracle::{diagonal_extraction, evaluate_f, InnerMinimizer, InnerSolution};
use crate::scalar::Scalar;

use super::correlated::correlated_inner;
use super::interdiction::interdiction_inner;
use super::maxflow::infinite_cut_threshold;
use super::{EffectiveCapacities, Network};

/// Default branch-and-bound node budget for correlated inner solves.
pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

/// Inner minimizer over the interdicted cuts of a network.
#[derive(Debug, Clone)]
pub struct NetworkInner<S> {
    node_budget: usize,
    /// Certified uniform diagonal shift for non-diagonal covariance.
    delta: Option<S>,
}

impl<S: Scalar> NetworkInner<S> {
    pub fn new(instance: &MeanRiskInstance<S>) -> Result<Self> {
        if instance.network().is_none() {
            return Err(Error::argument(
                "this minimizer handles interdiction instances only",
            ));
        }
        let delta = if instance.covariance().is_diagonal() {
            None
        } else {
            Some(diagonal_extraction(instance.covariance(), S::of(1e-9))?.delta)
        };
        Ok(NetworkInner {
            node_budget: DEFAULT_NODE_BUDGET,
            delta,
        })
    }

    pub fn with_node_budget(mut self, node_budget: usize) -> Self {
        self.node_budget = node_budget.max(1);
        self
    }

    fn network<'a>(&self, instance: &'a MeanRiskInstance<S>) -> Result<&'a Network<S>> {
        instance
            .network()
            .ok_or_else(|| Error::argument("this minimizer handles interdiction instances only"))
    }

    /// Inner solve at fixed `t` together with the interdicted arc indices.
    pub fn cut_at(
        &self,
        instance: &MeanRiskInstance<S>,
        t: S,
    ) -> Result<(InnerSolution<S>, Vec<usize>)> {
        if !(t > S::zero()) {
            return Err(Error::argument("inner problem requires t > 0"));
        }
        let network = self.network(instance)?;
        match self.delta {
            None => {
                let caps = EffectiveCapacities::new(network, instance.omega(), t)?;
                let cut = interdiction_inner(network, &caps.values, network.budget)?;
                if cut.residual_value >= infinite_cut_threshold(network, &caps.values) {
                    return Err(Error::model("network has no finite-capacity cut"));
                }
                let x = cut.indicator(network);
                let value = cut.residual_value + S::of(0.5) * instance.omega() * t;
                Ok((
                    InnerSolution {
                        x,
                        value,
                        exact: true,
                    },
                    cut.interdicted,
                ))
            }
            Some(delta) => {
                let out = correlated_inner(instance, network, t, delta, self.node_budget)?;
                Ok((
                    InnerSolution {
                        x: out.x,
                        value: out.value,
                        exact: out.exact,
                    },
                    out.interdicted,
                ))
            }
        }
    }

    /// Riskless interdiction solve with the interdicted arc indices.
    pub fn cut_riskless(
        &self,
        instance: &MeanRiskInstance<S>,
    ) -> Result<(InnerSolution<S>, Vec<usize>)> {
        let network = self.network(instance)?;
        let caps = network.mean_capacities();
        let cut = interdiction_inner(network, &caps, network.budget)?;
        if cut.residual_value >= infinite_cut_threshold(network, &caps) {
            return Err(Error::model("network has no finite-capacity cut"));
        }
        let x = cut.indicator(network);
        Ok((
            InnerSolution {
                x,
                value: cut.residual_value,
                exact: true,
            },
            cut.interdicted,
        ))
    }
}

impl<S: Scalar> InnerMinimizer<S> for NetworkInner<S> {
    fn minimize_at(&self, instance: &MeanRiskInstance<S>, t: S) -> Result<InnerSolution<S>> {
        self.cut_at(instance, t).map(|(sol, _)| sol)
    }

    fn minimize_riskless(&self, instance: &MeanRiskInstance<S>) -> Result<InnerSolution<S>> {
        self.cut_riskless(instance).map(|(sol, _)| sol)
    }
}

/// `f(t)` for an interdiction instance: effective-capacity reduction for
/// diagonal covariance, branch-and-bound otherwise.
pub fn mrni_inner_minimizer<S: Scalar>(
    instance: &MeanRiskInstance<S>,
    t: S,
) -> Result<(Vec<u8>, S)> {
    let minimizer = NetworkInner::new(instance)?;
    evaluate_f(&minimizer, instance, t)
}
