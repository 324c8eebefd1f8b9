//! Bisection search on the scalar `t` of the upper-bounding value function
//! `f(t) = min_x g(x, t)`: bracket initialization from the riskless optimum,
//! derivative-sign stepping, incumbent tracking, and local-minimum
//! certification.

use std::io::Write;

use crate::error::{Error, Result};
use crate::instance::{MeanRiskInstance, Solution};
use crate::objective;
use crate::oracle::{evaluate_f, InnerMinimizer, ENUMERATION_GUARD};
use crate::scalar::Scalar;

/// Stopping thresholds. `None` fields default from the instance: the
/// derivative threshold scales with `omega` (the derivative carries an
/// `omega` factor) and the bracket width with the initial `t_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig<S> {
    /// Derivative magnitude below which the midpoint counts as stationary.
    /// Defaults to `1e-6 * omega`.
    pub derivative_eps: Option<S>,
    /// Relative gap `(f(t) - mr(x(t))) / f(t)` that ends the search early.
    pub gap_tol: S,
    pub max_iters: usize,
    /// Absolute bracket-width stop. Defaults to `1e-9 * t_max`.
    pub bracket_tol: Option<S>,
}

impl<S: Scalar> Default for SearchConfig<S> {
    fn default() -> Self {
        SearchConfig {
            derivative_eps: None,
            gap_tol: S::of(0.01),
            max_iters: 64,
            bracket_tol: None,
        }
    }
}

impl<S: Scalar> SearchConfig<S> {
    fn validate(&self) -> Result<()> {
        if let Some(e) = self.derivative_eps {
            if !(e > S::zero()) {
                return Err(Error::argument("derivative_eps must be > 0"));
            }
        }
        if !(self.gap_tol > S::zero() && self.gap_tol < S::one()) {
            return Err(Error::argument("gap_tol must lie in (0, 1)"));
        }
        if self.max_iters == 0 {
            return Err(Error::argument("max_iters must be >= 1"));
        }
        if let Some(b) = self.bracket_tol {
            if !(b > S::zero()) {
                return Err(Error::argument("bracket_tol must be > 0"));
            }
        }
        Ok(())
    }
}

/// Why the search stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// `|dg/dt| < derivative_eps` at the midpoint: a local minimum of `f`.
    Derivative,
    /// Relative gap between `f(t)` and the mean-risk value closed.
    Gap,
    /// Bracket narrower than `bracket_tol`.
    Bracket,
    MaxIters,
    /// The riskless optimum has zero variance; no search was needed.
    Riskless,
}

/// One evaluated midpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow<S> {
    pub iteration: usize,
    pub t: S,
    pub f: S,
    pub mean_risk: S,
    /// Sign of `dg/dt` at the midpoint: -1, 0, +1.
    pub sign: i8,
}

/// Search result: the incumbent solution plus diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome<S> {
    pub solution: Solution<S>,
    pub trace: Vec<TraceRow<S>>,
    pub termination: Termination,
    pub iterations: usize,
    /// Final evaluated midpoint (the certificate reference).
    pub final_t: S,
}

/// Bracket initialization: solve the riskless problem, set
/// `t_max = sqrt(xbar' Q xbar)`. A zero `t_max` means the riskless optimum is
/// also the mean-risk optimum.
pub fn init_bracket<S: Scalar>(
    instance: &MeanRiskInstance<S>,
    minimizer: &dyn InnerMinimizer<S>,
) -> Result<(S, S, Vec<u8>)> {
    let riskless = minimizer.minimize_riskless(instance)?;
    let variance = instance
        .covariance()
        .quad_form_binary(&riskless.x)
        .max(S::zero());
    Ok((S::zero(), variance.sqrt(), riskless.x))
}

/// Bisection on `t` driven by the derivative sign of `g(x(t), t)`.
///
/// Returns the best mean-risk value among all evaluated inner minimizers,
/// never the last one alone. Requires `omega > 0`; for `omega = 0` callers
/// take the riskless path from `init_bracket` directly.
pub fn binary_local_search<S: Scalar>(
    instance: &MeanRiskInstance<S>,
    minimizer: &dyn InnerMinimizer<S>,
    config: &SearchConfig<S>,
) -> Result<SearchOutcome<S>> {
    config.validate()?;
    if !(instance.omega() > S::zero()) {
        return Err(Error::argument(
            "search requires omega > 0; use the riskless path otherwise",
        ));
    }
    let (mut t_min, mut t_max, xbar) = init_bracket(instance, minimizer)?;
    if t_max <= S::zero() {
        let solution = Solution::from_point(instance, xbar)?;
        let mut solution = solution;
        solution.gap_certificate = Some(S::zero());
        return Ok(SearchOutcome {
            solution,
            trace: Vec::new(),
            termination: Termination::Riskless,
            iterations: 0,
            final_t: S::zero(),
        });
    }

    let deriv_eps = config
        .derivative_eps
        .unwrap_or_else(|| S::of(1e-6) * instance.omega());
    let bracket_tol = config.bracket_tol.unwrap_or_else(|| S::of(1e-9) * t_max);

    let mut trace = Vec::new();
    let mut best: Option<(Vec<u8>, S, S)> = None; // (x, mean-risk value, t)
    let mut approximate = false;
    let mut termination = Termination::MaxIters;
    let mut final_t = t_max;
    let mut final_f = S::nan();

    let mut iteration = 0;
    while iteration < config.max_iters {
        iteration += 1;
        let t = (t_min + t_max) * S::of(0.5);
        let inner = minimizer.minimize_at(instance, t)?;
        approximate |= !inner.exact;
        let f_t = inner.value;
        let mr_t = objective::mean_risk_value(instance, &inner.x)?;
        let deriv = objective::dg_dt(instance, &inner.x, t)?;
        let sign = if deriv <= -deriv_eps {
            -1
        } else if deriv >= deriv_eps {
            1
        } else {
            0
        };
        trace.push(TraceRow {
            iteration,
            t,
            f: f_t,
            mean_risk: mr_t,
            sign,
        });
        final_t = t;
        final_f = f_t;
        let improves = match &best {
            None => true,
            Some((_, bv, _)) => mr_t < *bv,
        };
        if improves {
            best = Some((inner.x, mr_t, t));
        }

        if sign == 0 {
            termination = Termination::Derivative;
            break;
        }
        if sign < 0 {
            t_min = t;
        } else {
            t_max = t;
        }
        let gap = (f_t - mr_t) / f_t;
        if gap <= config.gap_tol {
            termination = Termination::Gap;
            break;
        }
        if t_max - t_min <= bracket_tol {
            termination = Termination::Bracket;
            break;
        }
    }

    let (x, value, t_at) = best.expect("at least one iteration ran");
    let gap_certificate = if final_f.is_nan() {
        S::zero()
    } else {
        (final_f - value) / final_f
    };
    let mut solution = Solution::from_point(instance, x)?.with_certificate(t_at, gap_certificate);
    solution.approximate = approximate;
    let iterations = trace.len();
    Ok(SearchOutcome {
        solution,
        trace,
        termination,
        iterations,
        final_t,
    })
}

/// Slack of the surrogate at `(x, t)`: `g(x, t) - mean_risk_value(x) >= 0`,
/// zero exactly when `t = sqrt(x'Qx)`.
pub fn certify_local_min<S: Scalar>(
    instance: &MeanRiskInstance<S>,
    x: &[u8],
    t: S,
) -> Result<S> {
    let g = objective::surrogate_g(instance, x, t)?;
    let mr = objective::mean_risk_value(instance, x)?;
    Ok(g - mr)
}

/// Exact optimum over an explicit set by scanning the finite candidate set
/// `{ t_x = sqrt(x'Qx) : x in X }`: the best inner minimizer across those
/// `t` values attains the global mean-risk minimum. Points with zero
/// variance are compared by their riskless value directly.
pub fn global_scan<S: Scalar>(
    instance: &MeanRiskInstance<S>,
    minimizer: &dyn InnerMinimizer<S>,
) -> Result<Solution<S>> {
    let points = instance
        .explicit_points()
        .ok_or_else(|| Error::argument("global scan handles explicit feasible sets only"))?;
    if points.len() > ENUMERATION_GUARD {
        return Err(Error::capacity(format!(
            "explicit set has {} points, guard is {ENUMERATION_GUARD}",
            points.len()
        )));
    }
    let mut best: Option<(Vec<u8>, S)> = None;
    let consider = |x: Vec<u8>, v: S, best: &mut Option<(Vec<u8>, S)>| {
        let replace = match best {
            None => true,
            Some((bx, bv)) => v < *bv || (v == *bv && x < *bx),
        };
        if replace {
            *best = Some((x, v));
        }
    };

    let mut candidates: Vec<S> = Vec::new();
    for p in points {
        let variance = instance.covariance().quad_form_binary(p).max(S::zero());
        let t = variance.sqrt();
        if t > S::zero() {
            if !candidates.iter().any(|&c| c == t) {
                candidates.push(t);
            }
        } else {
            // Zero-variance candidates bypass the surrogate.
            let v = objective::mean_risk_value(instance, p)?;
            consider(p.clone(), v, &mut best);
        }
    }
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for t in candidates {
        let (x, _) = evaluate_f(minimizer, instance, t)?;
        let v = objective::mean_risk_value(instance, &x)?;
        consider(x, v, &mut best);
    }
    let (x, _) = best.ok_or_else(|| Error::model("explicit feasible set is empty"))?;
    Solution::from_point(instance, x)
}

/// Trace rows as CSV: `iteration,t,f,mr,sign`.
pub fn write_trace_csv<S: Scalar, W: Write>(trace: &[TraceRow<S>], mut out: W) -> Result<()> {
    writeln!(out, "iteration,t,f,mr,sign")?;
    for row in trace {
        writeln!(
            out,
            "{},{},{},{},{}",
            row.iteration, row.t, row.f, row.mean_risk, row.sign
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::Covariance;
    use crate::oracle::BruteForce;

    fn example_two_point() -> MeanRiskInstance<f64> {
        MeanRiskInstance::explicit(
            vec![0.0, 1.0],
            Covariance::diagonal(vec![10.0, 5.0]).unwrap(),
            1.0,
            vec![vec![1, 0], vec![0, 1]],
        )
        .unwrap()
    }

    // Stops only once t is well inside 1e-6 of the stationary point: the
    // derivative fires at |t - sqrt(a)| ~ 2e-7 and the gap, quadratic in the
    // distance, around 1e-7.
    fn tight_config() -> SearchConfig<f64> {
        SearchConfig {
            derivative_eps: Some(1e-7),
            gap_tol: 1e-15,
            max_iters: 64,
            bracket_tol: None,
        }
    }

    #[test]
    fn bracket_starts_at_riskless_optimum() {
        let inst = example_two_point();
        let (t_min, t_max, xbar) = init_bracket(&inst, &BruteForce).unwrap();
        assert_eq!(t_min, 0.0);
        assert_eq!(xbar, vec![1, 0]);
        assert!((t_max - 10.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zero_covariance_returns_riskless_immediately() {
        let cov = Covariance::diagonal(vec![0.0, 0.0]).unwrap();
        let inst = MeanRiskInstance::explicit(
            vec![2.0, 1.0],
            cov,
            1.0,
            vec![vec![1, 0], vec![0, 1]],
        )
        .unwrap();
        let out = binary_local_search(&inst, &BruteForce, &SearchConfig::default()).unwrap();
        assert_eq!(out.termination, Termination::Riskless);
        assert_eq!(out.solution.x, vec![0, 1]);
        assert_eq!(out.solution.value, 1.0);
        assert_eq!(out.solution.gap_certificate, Some(0.0));
    }

    #[test]
    fn search_lands_in_the_left_local_minimum() {
        let inst = example_two_point();
        let out = binary_local_search(&inst, &BruteForce, &tight_config()).unwrap();
        assert_eq!(out.solution.x, vec![0, 1]);
        assert!((out.solution.value - (1.0 + 5.0f64.sqrt())).abs() < 1e-9);
        assert!((out.final_t - 5.0f64.sqrt()).abs() < 1e-6);
        // First two midpoints of the hand-checkable run.
        assert!((out.trace[0].t - 10.0f64.sqrt() / 2.0).abs() < 1e-12);
        assert_eq!(out.trace[0].sign, -1);
        assert!((out.trace[1].t - (10.0f64.sqrt() / 2.0 + 10.0f64.sqrt()) / 2.0).abs() < 1e-12);
        assert_eq!(out.trace[1].sign, 1);
    }

    #[test]
    fn default_config_stops_on_gap_with_same_incumbent() {
        let inst = example_two_point();
        let out = binary_local_search(&inst, &BruteForce, &SearchConfig::default()).unwrap();
        assert_eq!(out.solution.x, vec![0, 1]);
        assert!((out.solution.value - (1.0 + 5.0f64.sqrt())).abs() < 1e-9);
        assert!(out.iterations <= 6);
    }

    #[test]
    fn singleton_set_certifies_itself() {
        let cov = Covariance::diagonal(vec![4.0, 1.0]).unwrap();
        let inst = MeanRiskInstance::explicit(vec![1.0, 2.0], cov, 3.0, vec![vec![1, 1]]).unwrap();
        let out = binary_local_search(&inst, &BruteForce, &tight_config()).unwrap();
        assert_eq!(out.solution.x, vec![1, 1]);
        assert!((out.final_t - 5.0f64.sqrt()).abs() < 1e-6);
        assert!(out.solution.gap_certificate.unwrap() <= 1e-9);
    }

    #[test]
    fn stationarity_holds_at_derivative_termination() {
        // |t^2 - x'Qx| <= 1e-6 t^2 at the final midpoint when the stop is by
        // derivative; the threshold is set so the bound is implied.
        let inst = example_two_point();
        let config = SearchConfig {
            derivative_eps: Some(0.5e-6 * inst.omega()),
            gap_tol: 1e-15,
            max_iters: 64,
            bracket_tol: None,
        };
        let out = binary_local_search(&inst, &BruteForce, &config).unwrap();
        assert_eq!(out.termination, Termination::Derivative);
        let q = inst.covariance().quad_form_binary(&out.solution.x);
        let t2 = out.final_t * out.final_t;
        assert!((t2 - q).abs() <= 1e-6 * t2);
    }

    #[test]
    fn rejects_zero_omega_and_bad_config() {
        let inst = example_two_point().with_omega(0.0).unwrap();
        assert!(binary_local_search(&inst, &BruteForce, &SearchConfig::default()).is_err());
        let inst = example_two_point();
        let bad = SearchConfig {
            max_iters: 0,
            ..SearchConfig::default()
        };
        assert!(binary_local_search(&inst, &BruteForce, &bad).is_err());
    }

    #[test]
    fn certificate_slack_values() {
        let inst = example_two_point();
        let at_min = certify_local_min(&inst, &[0, 1], 5.0f64.sqrt()).unwrap();
        assert!(at_min.abs() < 1e-9);
        let off_min = certify_local_min(&inst, &[0, 1], 2.5).unwrap();
        assert!((off_min - (3.25 - (1.0 + 5.0f64.sqrt()))).abs() < 1e-9);
        assert!(off_min > 0.0);
    }

    #[test]
    fn global_scan_finds_the_global_optimum() {
        let inst = example_two_point();
        let sol = global_scan(&inst, &BruteForce).unwrap();
        assert_eq!(sol.x, vec![1, 0]);
        assert!((sol.value - 10.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn grid_search_lands_within_five_percent_of_exhaustive() {
        use crate::instgen::{generate_grid, GridSpec};
        use crate::netflow::{brute_force_interdiction_reference, NetworkInner};
        for seed in 1..=4u64 {
            let spec = GridSpec {
                cols: 3,
                rows: 3,
                seed,
                epsilon: 0.05,
                ..GridSpec::default()
            };
            let inst = generate_grid(&spec).unwrap().to_instance().unwrap();
            let minimizer = NetworkInner::new(&inst).unwrap();
            let out = binary_local_search(&inst, &minimizer, &SearchConfig::default()).unwrap();
            let brute = brute_force_interdiction_reference(&inst).unwrap();
            assert!(out.solution.value >= brute.value - 1e-9, "seed {seed}");
            assert!(
                out.solution.value <= 1.05 * brute.value,
                "seed {seed}: {} vs {}",
                out.solution.value,
                brute.value
            );
        }
    }

    #[test]
    fn global_scan_with_zero_omega_is_the_riskless_optimum() {
        let cov = Covariance::diagonal(vec![4.0, 9.0]).unwrap();
        let inst = MeanRiskInstance::explicit(
            vec![2.0, 1.0],
            cov,
            0.0,
            vec![vec![1, 0], vec![0, 1], vec![1, 1]],
        )
        .unwrap();
        let sol = global_scan(&inst, &BruteForce).unwrap();
        assert_eq!(sol.x, vec![0, 1]);
        assert_eq!(sol.value, 1.0);
    }

    #[test]
    fn global_scan_handles_zero_variance_points() {
        let cov = Covariance::diagonal(vec![0.0, 9.0]).unwrap();
        let inst = MeanRiskInstance::explicit(
            vec![1.0, 0.5],
            cov,
            2.0,
            vec![vec![1, 0], vec![0, 1]],
        )
        .unwrap();
        // (1,0): value 1. (0,1): 0.5 + 2*3 = 6.5.
        let sol = global_scan(&inst, &BruteForce).unwrap();
        assert_eq!(sol.x, vec![1, 0]);
        assert_eq!(sol.value, 1.0);
    }

    #[test]
    fn incumbent_never_worsens_and_stays_below_f() {
        let inst = example_two_point();
        let out = binary_local_search(&inst, &BruteForce, &tight_config()).unwrap();
        let mut best = f64::INFINITY;
        for row in &out.trace {
            best = best.min(row.mean_risk);
            assert!(best <= row.f + 1e-9);
        }
        assert!((best - out.solution.value).abs() < 1e-12);
    }

    #[test]
    fn trace_csv_has_stable_schema() {
        let inst = example_two_point();
        let out = binary_local_search(&inst, &BruteForce, &SearchConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&out.trace, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("iteration,t,f,mr,sign"));
        assert_eq!(lines.count(), out.trace.len());
    }

    #[test]
    fn search_is_deterministic() {
        let inst = example_two_point();
        let a = binary_local_search(&inst, &BruteForce, &SearchConfig::default()).unwrap();
        let b = binary_local_search(&inst, &BruteForce, &SearchConfig::default()).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.solution, b.solution);
    }

    #[test]
    fn works_in_single_precision_too() {
        let inst = MeanRiskInstance::<f32>::explicit(
            vec![0.0, 1.0],
            Covariance::diagonal(vec![10.0f32, 5.0]).unwrap(),
            1.0,
            vec![vec![1, 0], vec![0, 1]],
        )
        .unwrap();
        let out = binary_local_search(&inst, &BruteForce, &SearchConfig::default()).unwrap();
        assert!((out.solution.value - (1.0 + 5.0f32.sqrt())).abs() < 1e-3);
    }
}
