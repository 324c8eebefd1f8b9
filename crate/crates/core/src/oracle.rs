//! Inner-minimizer contract for evaluating the value function
//! `f(t) = min { g(x, t) : x in X }`, plus two general-purpose
//! implementations: explicit-set brute force and a linearization that
//! extracts a uniform diagonal from the covariance.

use crate::covariance::Covariance;
use crate::error::{Error, Result};
use crate::instance::{FeasibleSet, MeanRiskInstance};
use crate::linalg::{self};
use crate::objective;
use crate::scalar::Scalar;

/// Hard cap on explicit-set enumeration.
pub const ENUMERATION_GUARD: usize = 1 << 25;

/// One inner solve: the minimizer, its `g` value, and whether that value is
/// certified to be the global inner minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolution<S> {
    pub x: Vec<u8>,
    pub value: S,
    pub exact: bool,
}

/// Evaluates `f(t)` for an instance. Implementations must be deterministic
/// (ties broken by a documented rule) and reentrant: concurrent calls on the
/// same immutable instance are safe.
pub trait InnerMinimizer<S: Scalar>: Send + Sync {
    /// `argmin { g(x, t) : x in X }` for `t > 0`.
    fn minimize_at(&self, instance: &MeanRiskInstance<S>, t: S) -> Result<InnerSolution<S>>;

    /// `argmin { c'x : x in X }` — the riskless problem that seeds the
    /// search bracket.
    fn minimize_riskless(&self, instance: &MeanRiskInstance<S>) -> Result<InnerSolution<S>>;
}

/// `f(t)` evaluation with the domain checks callers rely on.
pub fn evaluate_f<S: Scalar>(
    minimizer: &dyn InnerMinimizer<S>,
    instance: &MeanRiskInstance<S>,
    t: S,
) -> Result<(Vec<u8>, S)> {
    if !(t > S::zero()) {
        return Err(Error::argument("f is evaluated for t > 0 only"));
    }
    let sol = minimizer.minimize_at(instance, t)?;
    Ok((sol.x, sol.value))
}

fn explicit_points<'a, S: Scalar>(instance: &'a MeanRiskInstance<S>) -> Result<&'a [Vec<u8>]> {
    match instance.feasible() {
        FeasibleSet::Explicit(pts) if pts.is_empty() => {
            Err(Error::model("explicit feasible set is empty"))
        }
        FeasibleSet::Explicit(pts) => {
            if pts.len() > ENUMERATION_GUARD {
                return Err(Error::capacity(format!(
                    "explicit set has {} points, guard is {ENUMERATION_GUARD}",
                    pts.len()
                )));
            }
            Ok(pts)
        }
        _ => Err(Error::argument(
            "this minimizer handles explicit feasible sets only",
        )),
    }
}

fn scan_linear<S: Scalar>(points: &[Vec<u8>], weights: &[S]) -> (Vec<u8>, S) {
    let mut best: Option<(&Vec<u8>, S)> = None;
    for p in points {
        let v = objective::dot_binary(weights, p);
        best = match best {
            None => Some((p, v)),
            Some((bx, bv)) => {
                if v < bv || (v == bv && p.as_slice() < bx.as_slice()) {
                    Some((p, v))
                } else {
                    Some((bx, bv))
                }
            }
        };
    }
    let (x, v) = best.expect("nonempty point list");
    (x.clone(), v)
}

/// Exhaustive inner minimizer over explicit sets. Ties in `g` go to the
/// lexicographically smallest point.
#[derive(Debug, Clone, Copy, Default)]
pub struct BruteForce;

impl<S: Scalar> InnerMinimizer<S> for BruteForce {
    fn minimize_at(&self, instance: &MeanRiskInstance<S>, t: S) -> Result<InnerSolution<S>> {
        if !(t > S::zero()) {
            return Err(Error::argument("inner problem requires t > 0"));
        }
        let points = explicit_points(instance)?;
        let mut best: Option<(&Vec<u8>, S)> = None;
        for p in points {
            let v = objective::surrogate_g(instance, p, t)?;
            best = match best {
                None => Some((p, v)),
                Some((bx, bv)) => {
                    if v < bv || (v == bv && p.as_slice() < bx.as_slice()) {
                        Some((p, v))
                    } else {
                        Some((bx, bv))
                    }
                }
            };
        }
        let (x, value) = best.expect("nonempty point list");
        Ok(InnerSolution {
            x: x.clone(),
            value,
            exact: true,
        })
    }

    fn minimize_riskless(&self, instance: &MeanRiskInstance<S>) -> Result<InnerSolution<S>> {
        let points = explicit_points(instance)?;
        let (x, value) = scan_linear(points, instance.cost());
        Ok(InnerSolution {
            x,
            value,
            exact: true,
        })
    }
}

/// Uniform diagonal shift `delta` with `Q - delta I` still PSD, certified by
/// the pivot check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractionCertificate<S> {
    pub delta: S,
    pub lambda_min_estimate: S,
    pub residual_psd_check: bool,
}

fn power_iteration<S: Scalar, F: Fn(&[S]) -> Vec<S>>(n: usize, apply: F) -> S {
    // Deterministic pseudo-random start so no eigenvector is missed by
    // symmetry of a structured start.
    let mut state = 0x9E3779B97F4A7C15u64 ^ (n as u64);
    let mut v: Vec<S> = (0..n)
        .map(|_| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            S::of(((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5)
        })
        .collect();
    let norm = linalg::norm2(&v).max(S::min_positive_value());
    for vi in v.iter_mut() {
        *vi = *vi / norm;
    }
    let mut rayleigh = S::zero();
    for _ in 0..5000 {
        let w = apply(&v);
        let new_rayleigh = linalg::dot(&v, &w);
        let norm = linalg::norm2(&w);
        if norm <= S::min_positive_value() {
            return S::zero();
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = *wi / norm;
        }
        if (new_rayleigh - rayleigh).abs() <= S::of(1e-14) * new_rayleigh.abs().max(S::one()) {
            return new_rayleigh;
        }
        rayleigh = new_rayleigh;
    }
    rayleigh
}

fn densified_psd_ok<S: Scalar>(cov: &Covariance<S>, delta: S) -> bool {
    let n = cov.dim();
    let dense = cov.densify();
    let mut entries = dense.data().to_vec();
    let mut trace = S::zero();
    for i in 0..n {
        entries[i * n + i] = entries[i * n + i] - delta;
        trace += entries[i * n + i];
    }
    linalg::psd_pivot_check(n, &entries, S::of(1e-9) * trace.abs())
}

/// Largest certified uniform diagonal shift of a PSD covariance: estimate the
/// smallest eigenvalue by inverse-free shifted power iteration, floor at
/// zero, and halve until `Q - delta I` passes the pivot check.
pub fn diagonal_extraction<S: Scalar>(cov: &Covariance<S>, tol: S) -> Result<ExtractionCertificate<S>> {
    let n = cov.dim();
    if n == 0 {
        return Err(Error::argument("empty covariance"));
    }
    if let Covariance::Dense { n, entries } = cov {
        let trace: S = (0..*n).map(|i| entries[i * n + i]).sum();
        if !linalg::psd_pivot_check(*n, entries, S::of(1e-9) * trace.abs()) {
            return Err(Error::model("covariance is not positive semidefinite"));
        }
    }
    let lambda_min = if let Some(q) = cov.diagonal_variances() {
        q.iter().copied().fold(S::infinity(), S::min)
    } else {
        let lambda_max = power_iteration(n, |v| cov.matvec(v)).max(S::zero());
        if lambda_max <= S::zero() {
            S::zero()
        } else {
            let shift = lambda_max * S::of(1.01) + S::of(1e-12);
            let mu = power_iteration(n, |v| {
                let qv = cov.matvec(v);
                v.iter()
                    .zip(qv)
                    .map(|(&vi, qvi)| shift * vi - qvi)
                    .collect()
            });
            shift - mu
        }
    };

    let safety = tol.abs().max(S::of(1e-7));
    let mut delta = (lambda_min * (S::one() - safety)).max(S::zero());
    let mut checked = delta == S::zero() || densified_psd_ok(cov, delta);
    let mut halvings = 0;
    while !checked && halvings < 60 {
        delta = delta * S::of(0.5);
        halvings += 1;
        checked = densified_psd_ok(cov, delta);
    }
    if !checked {
        delta = S::zero();
    }
    Ok(ExtractionCertificate {
        delta,
        lambda_min_estimate: lambda_min,
        residual_psd_check: true,
    })
}

/// Valid lower bound on `f(t)`: on binaries, `x'Qx >= delta * 1'x` once
/// `Q - delta I` is PSD, so minimizing the shifted linear objective
/// `(c + (omega/2t) delta 1)'x + (omega/2) t` under-estimates the inner
/// minimum. `solve_linear` must return the exact linear minimum over X.
pub fn linearized_inner_bound<S, F>(
    instance: &MeanRiskInstance<S>,
    t: S,
    cert: &ExtractionCertificate<S>,
    solve_linear: F,
) -> Result<S>
where
    S: Scalar,
    F: FnOnce(&[S]) -> Result<(Vec<u8>, S)>,
{
    if !(t > S::zero()) {
        return Err(Error::argument("bound requires t > 0"));
    }
    let coef = instance.omega() / (S::of(2.0) * t) * cert.delta;
    let weights: Vec<S> = instance.cost().iter().map(|&c| c + coef).collect();
    let (_, linear_min) = solve_linear(&weights)?;
    Ok(linear_min + S::of(0.5) * instance.omega() * t)
}

/// Inner minimizer that reduces the quadratic to a linear objective over an
/// explicit set: exact for diagonal covariance (the quadratic is linear on
/// binaries), an upper-bounding heuristic with `exact = false` otherwise.
#[derive(Debug, Clone)]
pub struct LinearizedMinimizer<S> {
    delta: S,
    diagonal: bool,
}

impl<S: Scalar> LinearizedMinimizer<S> {
    pub fn new(instance: &MeanRiskInstance<S>) -> Result<Self> {
        let cov = instance.covariance();
        if cov.is_diagonal() {
            Ok(LinearizedMinimizer {
                delta: S::zero(),
                diagonal: true,
            })
        } else {
            let cert = diagonal_extraction(cov, S::of(1e-9))?;
            Ok(LinearizedMinimizer {
                delta: cert.delta,
                diagonal: false,
            })
        }
    }
}

impl<S: Scalar> InnerMinimizer<S> for LinearizedMinimizer<S> {
    fn minimize_at(&self, instance: &MeanRiskInstance<S>, t: S) -> Result<InnerSolution<S>> {
        if !(t > S::zero()) {
            return Err(Error::argument("inner problem requires t > 0"));
        }
        let points = explicit_points(instance)?;
        let coef = instance.omega() / (S::of(2.0) * t);
        let weights: Vec<S> = if self.diagonal {
            let q = instance
                .covariance()
                .diagonal_variances()
                .expect("diagonal covariance");
            instance
                .cost()
                .iter()
                .zip(q)
                .map(|(&c, &qi)| c + coef * qi)
                .collect()
        } else {
            instance.cost().iter().map(|&c| c + coef * self.delta).collect()
        };
        let (x, _) = scan_linear(points, &weights);
        // Report the true surrogate value of the selected point.
        let value = objective::surrogate_g(instance, &x, t)?;
        Ok(InnerSolution {
            x,
            value,
            exact: self.diagonal,
        })
    }

    fn minimize_riskless(&self, instance: &MeanRiskInstance<S>) -> Result<InnerSolution<S>> {
        BruteForce.minimize_riskless(instance)
    }
}
