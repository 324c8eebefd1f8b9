//! The mean-risk objective and its quadratic upper-bounding surrogate.
//!
//! For a binary point `x`, the objective is `c'x + omega * sqrt(x'Qx)`. The
//! surrogate `g(x, t) = c'x + (omega/2) h(x, t) + (omega/2) t`, built from the
//! closed perspective `h` of the quadratic form, dominates it for every
//! `t >= 0` and matches it at `t = sqrt(x'Qx)`.

use crate::covariance::Covariance;
use crate::error::{Error, Result};
use crate::instance::MeanRiskInstance;
use crate::scalar::Scalar;

#[inline]
pub(crate) fn dot_binary<S: Scalar>(c: &[S], x: &[u8]) -> S {
    c.iter()
        .zip(x)
        .filter(|(_, &xi)| xi != 0)
        .map(|(&ci, _)| ci)
        .sum()
}

fn check_dim<S: Scalar>(instance: &MeanRiskInstance<S>, x: &[u8]) -> Result<()> {
    if x.len() != instance.dim() {
        return Err(Error::argument(format!(
            "vector has dimension {}, instance has {}",
            x.len(),
            instance.dim()
        )));
    }
    if x.iter().any(|&b| b > 1) {
        return Err(Error::argument("vector must be binary"));
    }
    Ok(())
}

/// `c'x + omega * sqrt(x'Qx)`.
pub fn mean_risk_value<S: Scalar>(instance: &MeanRiskInstance<S>, x: &[u8]) -> Result<S> {
    check_dim(instance, x)?;
    let mean = dot_binary(instance.cost(), x);
    let var = instance.covariance().quad_form_binary(x).max(S::zero());
    Ok(mean + instance.omega() * var.sqrt())
}

/// Closure of the perspective of the quadratic form: `x'Qx / t` for `t > 0`,
/// `0` when `t = 0` and `x'Qx = 0`, and the infinity sentinel otherwise.
pub fn perspective_h<S: Scalar>(cov: &Covariance<S>, x: &[S], t: S) -> Result<S> {
    if x.len() != cov.dim() {
        return Err(Error::argument("vector dimension mismatch"));
    }
    if t < S::zero() {
        return Err(Error::argument("perspective requires t >= 0"));
    }
    let q = cov.quad_form(x);
    if t > S::zero() {
        Ok(q / t)
    } else if q == S::zero() {
        Ok(S::zero())
    } else {
        Ok(S::infinity())
    }
}

/// `g(x, t) = c'x + (omega/2) * x'Qx / t + (omega/2) t`, defined for `t > 0`.
pub fn surrogate_g<S: Scalar>(instance: &MeanRiskInstance<S>, x: &[u8], t: S) -> Result<S> {
    check_dim(instance, x)?;
    if !(t > S::zero()) {
        return Err(Error::argument("surrogate requires t > 0"));
    }
    let half_omega = S::of(0.5) * instance.omega();
    let q = instance.covariance().quad_form_binary(x);
    Ok(dot_binary(instance.cost(), x) + half_omega * q / t + half_omega * t)
}

/// `dg/dt = -(omega/2) x'Qx / t^2 + omega/2`; vanishes at `t = sqrt(x'Qx)`.
pub fn dg_dt<S: Scalar>(instance: &MeanRiskInstance<S>, x: &[u8], t: S) -> Result<S> {
    check_dim(instance, x)?;
    if !(t > S::zero()) {
        return Err(Error::argument("derivative requires t > 0"));
    }
    let half_omega = S::of(0.5) * instance.omega();
    let q = instance.covariance().quad_form_binary(x);
    Ok(half_omega - half_omega * q / (t * t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn example_two_point() -> MeanRiskInstance<f64> {
        MeanRiskInstance::explicit(
            vec![0.0, 1.0],
            Covariance::diagonal(vec![10.0, 5.0]).unwrap(),
            1.0,
            vec![vec![1, 0], vec![0, 1]],
        )
        .unwrap()
    }

    #[test]
    fn mean_risk_matches_hand_values() {
        let inst = example_two_point();
        let a = mean_risk_value(&inst, &[1, 0]).unwrap();
        assert!((a - 10.0f64.sqrt()).abs() < 1e-12);
        let b = mean_risk_value(&inst, &[0, 1]).unwrap();
        assert!((b - (1.0 + 5.0f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn zero_omega_drops_the_risk_term() {
        let inst = example_two_point().with_omega(0.0).unwrap();
        assert_eq!(mean_risk_value(&inst, &[0, 1]).unwrap(), 1.0);
        // g(x, t) = c'x for every t when omega = 0.
        for t in [0.1, 1.0, 7.0] {
            assert_eq!(surrogate_g(&inst, &[0, 1], t).unwrap(), 1.0);
        }
    }

    #[test]
    fn dimension_mismatch_is_an_argument_error() {
        let inst = example_two_point();
        assert!(mean_risk_value(&inst, &[1]).is_err());
        assert!(surrogate_g(&inst, &[1, 0, 0], 1.0).is_err());
    }

    #[test]
    fn perspective_closure_cases() {
        let cov = Covariance::diagonal(vec![10.0f64, 5.0]).unwrap();
        assert_eq!(perspective_h(&cov, &[0.0, 1.0], 2.0).unwrap(), 2.5);
        assert_eq!(perspective_h(&cov, &[0.0, 0.0], 0.0).unwrap(), 0.0);
        assert!(perspective_h(&cov, &[1.0, 0.0], 0.0).unwrap().is_infinite());
        assert!(perspective_h(&cov, &[1.0, 0.0], -1.0).is_err());
    }

    #[test]
    fn surrogate_matches_curve_intersection() {
        // Both feasible points evaluate to 3.25 at t = 2.5.
        let inst = example_two_point();
        let a = surrogate_g(&inst, &[1, 0], 2.5).unwrap();
        let b = surrogate_g(&inst, &[0, 1], 2.5).unwrap();
        assert!((a - 3.25).abs() < 1e-12);
        assert!((b - 3.25).abs() < 1e-12);
    }

    #[test]
    fn derivative_vanishes_at_matching_t() {
        let inst = example_two_point();
        assert!(dg_dt(&inst, &[0, 1], 5.0f64.sqrt()).unwrap().abs() < 1e-12);
        assert!(dg_dt(&inst, &[1, 0], 10.0f64.sqrt()).unwrap().abs() < 1e-12);
        let d = dg_dt(&inst, &[0, 1], 1.58114f64).unwrap();
        assert!((d - (-0.5)).abs() < 1e-4);
        assert!(dg_dt(&inst, &[0, 1], 0.0).is_err());
    }

    proptest! {
        // sqrt(a) <= (a/t + t)/2 with equality iff t = sqrt(a).
        #[test]
        fn sqrt_bounded_by_half_sum(a in 0.0f64..1e6, t in 1e-9f64..1e3) {
            prop_assert!(a.sqrt() <= 0.5 * (a / t + t) + 1e-12);
        }

        #[test]
        fn half_sum_is_tight_only_at_sqrt(a in 1e-6f64..1e6) {
            let t = a.sqrt();
            prop_assert!((0.5 * (a / t + t) - a.sqrt()).abs() <= 1e-9 * a.sqrt().max(1.0));
        }

        // h(lambda x, lambda t) = lambda h(x, t) for lambda > 0.
        #[test]
        fn perspective_is_positively_homogeneous(
            x in proptest::collection::vec(-3.0f64..3.0, 3),
            t in 0.01f64..100.0,
            lambda in 0.01f64..100.0,
        ) {
            let cov = Covariance::diagonal(vec![2.0, 0.5, 1.0]).unwrap();
            let scaled: Vec<f64> = x.iter().map(|v| v * lambda).collect();
            let lhs = perspective_h(&cov, &scaled, lambda * t).unwrap();
            let rhs = lambda * perspective_h(&cov, &x, t).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0));
        }

        // Pointwise domination of the objective by the surrogate.
        #[test]
        fn surrogate_dominates_mean_risk(
            bits in 0u8..4,
            t in 1e-3f64..1e3,
            omega in 0.0f64..5.0,
        ) {
            let inst = example_two_point().with_omega(omega).unwrap();
            let x = vec![bits & 1, (bits >> 1) & 1];
            let mr = mean_risk_value(&inst, &x).unwrap();
            let g = surrogate_g(&inst, &x, t).unwrap();
            prop_assert!(mr <= g + 1e-9);
        }

        // Central finite difference of g matches the analytic derivative.
        #[test]
        fn derivative_matches_finite_difference(
            bits in 1u8..4,
            t in 0.05f64..50.0,
        ) {
            let inst = example_two_point();
            let x = vec![bits & 1, (bits >> 1) & 1];
            let h = 1e-6 * t;
            let fd = (surrogate_g(&inst, &x, t + h).unwrap()
                - surrogate_g(&inst, &x, t - h).unwrap())
                / (2.0 * h);
            let an = dg_dt(&inst, &x, t).unwrap();
            prop_assert!((fd - an).abs() <= 1e-5 * an.abs().max(1e-3));
        }
    }
}
