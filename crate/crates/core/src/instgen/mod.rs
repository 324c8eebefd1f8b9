//! Reproducible benchmark instances: p x q grid interdiction networks with
//! integral-uniform capacities, optional factor-model correlation, and the
//! structured-text instance/solution formats.

mod format;

pub use format::{
    parse_instance, parse_solution, serialize_instance, serialize_solution, SolutionDocument,
};

use crate::covariance::Covariance;
use crate::error::{Error, Result};
use crate::instance::MeanRiskInstance;
use crate::linalg::Matrix;
use crate::netflow::{NetArc, Network};
use crate::normal::inv_normal_cdf;

/// SplitMix64: state advances by the golden-ratio increment and each output
/// is finalized with two xor-shift multiplies. Substreams derive their seed
/// by mixing the base seed with a per-field-class tag, so adding draws to
/// one field never shifts another field's sequence.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

const GOLDEN: u64 = 0x9E3779B97F4A7C15;
const CLASS_MULT: u64 = 0xA0761D6478BD642F;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Substream for a field class.
    pub fn stream(seed: u64, class: u64) -> Self {
        SplitMix64 {
            state: mix64(seed ^ class.wrapping_mul(CLASS_MULT)),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform in [0, 1) with 53 bits.
    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform integer in {lo, ..., hi}.
    pub fn uniform_int(&mut self, lo: u64, hi: u64) -> u64 {
        debug_assert!(lo <= hi);
        lo + self.next_u64() % (hi - lo + 1)
    }

    /// Continuous uniform in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + self.next_unit() * (hi - lo)
    }
}

mod stream_class {
    pub const MEANS: u64 = 1;
    pub const STDEVS: u64 = 2;
    pub const COSTS: u64 = 3;
    pub const DIRECTIONS: u64 = 4;
    pub const EXPOSURE: u64 = 5;
    pub const FACTOR: u64 = 6;
}

/// How the interdiction budget is derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BudgetRule {
    /// `cost_scale * ceil(rows / 2)`.
    HalfRows,
    /// `mean(alpha) * rows / eta` for eta in {2, 4, 6, 8, 10, 20}.
    MeanCostScaled(u32),
    /// Fixed budget.
    Explicit(f64),
}

/// Parameters of one generated grid instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub cols: usize,
    pub rows: usize,
    pub seed: u64,
    pub correlated: bool,
    /// Factor count for correlated instances.
    pub factors: usize,
    pub epsilon: f64,
    pub budget_rule: BudgetRule,
    /// Interdiction costs are integral uniform on [r, 3r].
    pub cost_scale: u32,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            cols: 10,
            rows: 10,
            seed: 0,
            correlated: false,
            factors: 20,
            epsilon: 0.05,
            budget_rule: BudgetRule::HalfRows,
            cost_scale: 1,
        }
    }
}

impl GridSpec {
    fn validate(&self) -> Result<()> {
        if self.rows < 2 {
            return Err(Error::argument("rows must be >= 2"));
        }
        if self.cols < 2 {
            return Err(Error::argument("cols must be >= 2"));
        }
        if self.correlated && self.factors < 1 {
            return Err(Error::argument("factors must be >= 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 0.5) {
            return Err(Error::argument("epsilon must lie in (0, 0.5]"));
        }
        if self.cost_scale < 1 {
            return Err(Error::argument("cost-scale must be >= 1"));
        }
        if let BudgetRule::MeanCostScaled(eta) = self.budget_rule {
            if ![2, 4, 6, 8, 10, 20].contains(&eta) {
                return Err(Error::argument("eta must be one of 2, 4, 6, 8, 10, 20"));
            }
        }
        if let BudgetRule::Explicit(beta) = self.budget_rule {
            if !(beta >= 0.0) {
                return Err(Error::argument("budget must be >= 0"));
            }
        }
        Ok(())
    }
}

/// One generated instance with its calibration metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct GridInstance {
    pub network: Network<f64>,
    pub covariance: Covariance<f64>,
    pub omega: f64,
    pub epsilon: f64,
}

impl GridInstance {
    pub fn to_instance(&self) -> Result<MeanRiskInstance<f64>> {
        MeanRiskInstance::interdiction(self.network.clone(), self.covariance.clone(), self.omega)
    }
}

/// Grid topology: a source fanning into the first column, columns chained
/// toward the sink by horizontal arcs, vertical arcs inside each column with
/// random orientation, and the last column fanning into the sink. Fan arcs
/// are infinite and non-interdictable. Means and standard deviations are
/// integral uniform on [1, 10], interdiction costs integral uniform on
/// [r, 3r].
pub fn generate_grid(spec: &GridSpec) -> Result<GridInstance> {
    spec.validate()?;
    let p = spec.cols;
    let q = spec.rows;
    let node = |i: usize, j: usize| 1 + i * q + j;
    let source = 0usize;
    let sink = 1 + p * q;

    let mut means = SplitMix64::stream(spec.seed, stream_class::MEANS);
    let mut stdevs = SplitMix64::stream(spec.seed, stream_class::STDEVS);
    let mut costs = SplitMix64::stream(spec.seed, stream_class::COSTS);
    let mut directions = SplitMix64::stream(spec.seed, stream_class::DIRECTIONS);

    let r = spec.cost_scale as u64;
    let mut arcs: Vec<NetArc<f64>> = Vec::new();
    let mut push_interdictable = |arcs: &mut Vec<NetArc<f64>>, tail: usize, head: usize| {
        let mean = means.uniform_int(1, 10) as f64;
        let sd = stdevs.uniform_int(1, 10) as f64;
        let cost = costs.uniform_int(r, 3 * r) as f64;
        arcs.push(NetArc {
            tail,
            head,
            mean,
            variance: sd * sd,
            cost,
            interdictable: true,
        });
    };
    let fan = |tail: usize, head: usize| NetArc {
        tail,
        head,
        mean: f64::INFINITY,
        variance: 0.0,
        cost: 0.0,
        interdictable: false,
    };

    for j in 0..q {
        arcs.push(fan(source, node(0, j)));
    }
    for i in 0..p - 1 {
        for j in 0..q {
            push_interdictable(&mut arcs, node(i, j), node(i + 1, j));
        }
    }
    for i in 0..p {
        for j in 0..q - 1 {
            let downward = directions.next_u64() & 1 == 0;
            let (tail, head) = if downward {
                (node(i, j), node(i, j + 1))
            } else {
                (node(i, j + 1), node(i, j))
            };
            push_interdictable(&mut arcs, tail, head);
        }
    }
    for j in 0..q {
        arcs.push(fan(node(p - 1, j), sink));
    }

    let interdictable: Vec<usize> = arcs
        .iter()
        .enumerate()
        .filter(|(_, a)| a.interdictable)
        .map(|(i, _)| i)
        .collect();
    let n = interdictable.len();

    let budget = match spec.budget_rule {
        BudgetRule::HalfRows => (spec.cost_scale as f64) * ((q + 1) / 2) as f64,
        BudgetRule::MeanCostScaled(eta) => {
            let mean_alpha: f64 =
                interdictable.iter().map(|&a| arcs[a].cost).sum::<f64>() / n as f64;
            mean_alpha * q as f64 / eta as f64
        }
        BudgetRule::Explicit(beta) => beta,
    };

    let covariance = if spec.correlated {
        let m = spec.factors;
        let mut exposure_rng = SplitMix64::stream(spec.seed, stream_class::EXPOSURE);
        let mut factor_rng = SplitMix64::stream(spec.seed, stream_class::FACTOR);
        let mut e = vec![0.0f64; n * m];
        for entry in e.iter_mut() {
            if exposure_rng.next_unit() < 0.2 {
                *entry = exposure_rng.uniform(0.0, 0.1);
            }
        }
        let bound = 100.0 / (p * q) as f64;
        let h: Vec<f64> = (0..m * m)
            .map(|_| factor_rng.uniform(-bound, bound))
            .collect();
        let sigma2: Vec<f64> = interdictable.iter().map(|&a| arcs[a].variance).collect();
        Covariance::factor(sigma2, Matrix::new(n, m, e)?, Matrix::new(m, m, h)?)?
    } else {
        Covariance::diagonal(interdictable.iter().map(|&a| arcs[a].variance).collect())?
    };

    let network = Network::new(2 + p * q, source, sink, arcs, budget)?;
    let omega = inv_normal_cdf(1.0 - spec.epsilon)?;
    Ok(GridInstance {
        network,
        covariance,
        omega,
        epsilon: spec.epsilon,
    })
}
