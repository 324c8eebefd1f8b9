//! Discrete mean-risk minimization `min { c'x + omega * sqrt(x'Qx) : x in X }`
//! over binary feasible sets, solved by successive quadratic upper bounds:
//! a bisection on the scalar `t` of the perspective surrogate
//! `g(x, t) = c'x + (omega/2) x'Qx / t + (omega/2) t`, whose pointwise inner
//! minimum dominates the objective everywhere and matches it at local minima.
//!
//! The inner problems are solved exactly for explicit point sets and for
//! stochastic network interdiction (budgeted min cuts), where the diagonal
//! case reduces to a linear budgeted min-cut per `t`. Extras: polymatroid
//! inequalities for the diagonal epigraph, reproducible grid-instance
//! generation, desk-scale exact references, and structured-text formats.
//!
//! All numeric modules are generic over [`scalar::Scalar`] (any `num-traits`
//! float); the crate-root aliases pin the production `f64` types.

pub mod covariance;
pub mod error;
pub mod instance;
pub mod instgen;
pub mod linalg;
pub mod netflow;
pub mod normal;
pub mod objective;
pub mod oracle;
pub mod polymatroid;
pub mod scalar;
pub mod search;

pub use error::{Error, Result};
pub use objective::{dg_dt, mean_risk_value, perspective_h, surrogate_g};
pub use normal::{inv_normal_cdf, normal_cdf, omega_from_confidence, Calibration};
pub use oracle::{
    diagonal_extraction, evaluate_f, linearized_inner_bound, BruteForce, InnerMinimizer,
    LinearizedMinimizer,
};
pub use scalar::Scalar;
pub use search::{
    binary_local_search, certify_local_min, global_scan, init_bracket, write_trace_csv,
    Termination,
};

/// `f64` instantiations of the generic core types.
pub type Covariance = covariance::Covariance<f64>;
pub type ConfidenceSpec = normal::ConfidenceSpec<f64>;
pub type MeanRiskInstance = instance::MeanRiskInstance<f64>;
pub type FeasibleSet = instance::FeasibleSet<f64>;
pub type Solution = instance::Solution<f64>;
pub type InnerSolution = oracle::InnerSolution<f64>;
pub type ExtractionCertificate = oracle::ExtractionCertificate<f64>;
pub type SearchConfig = search::SearchConfig<f64>;
pub type SearchOutcome = search::SearchOutcome<f64>;
pub type TraceRow = search::TraceRow<f64>;
pub type Network = netflow::Network<f64>;
pub type NetArc = netflow::NetArc<f64>;
pub type CutSolution = netflow::CutSolution<f64>;
pub type EffectiveCapacities = netflow::EffectiveCapacities<f64>;
pub type NetworkInner = netflow::NetworkInner<f64>;
pub type PolymatroidCut = polymatroid::PolymatroidCut<f64>;
pub type Matrix = linalg::Matrix<f64>;
