//! Extended polymatroid inequalities for the diagonal mean-risk epigraph
//! `w >= sqrt(q'x)`: greedy extreme points from permutation prefix
//! differences, exact separation by sorting, and exhaustive validity checks.
//!
//! The set function `sigma(T) = sqrt(sum_{i in T} q_i)` is submodular, so
//! every permutation's prefix-difference vector is an extreme point of the
//! associated extended polymatroid and `w >= pi'x` is valid for the epigraph.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One inequality `w >= pi'x` together with the permutation that built it.
#[derive(Debug, Clone, PartialEq)]
pub struct PolymatroidCut<S> {
    pub pi: Vec<S>,
    pub permutation: Vec<usize>,
}

impl<S: Scalar> PolymatroidCut<S> {
    /// Text row: permutation, coefficients, and the inequality form.
    pub fn to_text_row(&self) -> String {
        let mut out = String::new();
        out.push_str("perm=[");
        for (k, p) in self.permutation.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            let _ = write!(out, "{p}");
        }
        out.push_str("] pi=[");
        for (k, c) in self.pi.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            let _ = write!(out, "{c}");
        }
        out.push_str("] w >= pi.x");
        out
    }
}

fn check_variances<S: Scalar>(q: &[S]) -> Result<()> {
    if q.iter().any(|v| !v.is_finite() || *v < S::zero()) {
        return Err(Error::argument("variances must be finite and >= 0"));
    }
    Ok(())
}

/// Greedy extreme point along `permutation`: coefficients are the prefix
/// differences `sigma(S_k) - sigma(S_{k-1})` of `sigma(T) = sqrt(q(T))`.
pub fn greedy_extreme_point<S: Scalar>(q: &[S], permutation: &[usize]) -> Result<PolymatroidCut<S>> {
    check_variances(q)?;
    if permutation.len() != q.len() {
        return Err(Error::argument("permutation length mismatch"));
    }
    let mut seen = vec![false; q.len()];
    for &p in permutation {
        if p >= q.len() || seen[p] {
            return Err(Error::argument("not a permutation"));
        }
        seen[p] = true;
    }
    let mut pi = vec![S::zero(); q.len()];
    let mut prefix = S::zero();
    let mut prev_sigma = S::zero();
    for &idx in permutation {
        prefix += q[idx];
        let sigma = prefix.sqrt();
        pi[idx] = sigma - prev_sigma;
        prev_sigma = sigma;
    }
    Ok(PolymatroidCut {
        pi,
        permutation: permutation.to_vec(),
    })
}

/// Exact separation over the extended polymatroid: sort coordinates by
/// decreasing `x_hat` (ties by index), build the greedy extreme point, and
/// return it iff it is violated by more than `1e-9`. Among all permutations
/// the sorted one maximizes `pi' x_hat`, so a `None` certifies feasibility.
pub fn separate<S: Scalar>(q: &[S], x_hat: &[S], w_hat: S) -> Result<Option<PolymatroidCut<S>>> {
    check_variances(q)?;
    if x_hat.len() != q.len() {
        return Err(Error::argument("point dimension mismatch"));
    }
    if x_hat.iter().any(|v| *v < S::zero() || *v > S::one()) {
        return Err(Error::argument("point must lie in the unit box"));
    }
    let mut order: Vec<usize> = (0..q.len()).collect();
    order.sort_by(|&a, &b| x_hat[b].partial_cmp(&x_hat[a]).unwrap().then(a.cmp(&b)));
    let cut = greedy_extreme_point(q, &order)?;
    let lhs: S = cut.pi.iter().zip(x_hat).map(|(&p, &x)| p * x).sum();
    if lhs > w_hat + S::of(1e-9) {
        Ok(Some(cut))
    } else {
        Ok(None)
    }
}

/// Exhaustive validity check: `pi'x <= sqrt(q'x) + 1e-9` on every binary
/// point, with equality on each prefix indicator of the cut's permutation.
pub fn validate_cut<S: Scalar>(cut: &PolymatroidCut<S>, q: &[S]) -> Result<bool> {
    check_variances(q)?;
    let n = q.len();
    if cut.pi.len() != n || cut.permutation.len() != n {
        return Err(Error::argument("cut dimension mismatch"));
    }
    if n > 20 {
        return Err(Error::capacity("exhaustive validation is limited to n <= 20"));
    }
    let tol = S::of(1e-9);
    for mask in 0..(1u64 << n) {
        let mut lhs = S::zero();
        let mut qx = S::zero();
        for i in 0..n {
            if (mask >> i) & 1 == 1 {
                lhs += cut.pi[i];
                qx += q[i];
            }
        }
        if lhs > qx.sqrt() + tol {
            return Ok(false);
        }
    }
    // Tightness along the defining chain.
    let mut prefix_mask = 0u64;
    let mut qx = S::zero();
    for &idx in &cut.permutation {
        prefix_mask |= 1 << idx;
        qx += q[idx];
        let mut lhs = S::zero();
        for i in 0..n {
            if (prefix_mask >> i) & 1 == 1 {
                lhs += cut.pi[i];
            }
        }
        if (lhs - qx.sqrt()).abs() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn prefix_differences_match_hand_values() {
        let cut = greedy_extreme_point(&[10.0, 5.0], &[0, 1]).unwrap();
        assert!((cut.pi[0] - 10.0f64.sqrt()).abs() < 1e-12);
        assert!((cut.pi[1] - (15.0f64.sqrt() - 10.0f64.sqrt())).abs() < 1e-12);

        let cut = greedy_extreme_point(&[4.0, 0.0, 0.0], &[0, 1, 2]).unwrap();
        assert_eq!(cut.pi, vec![2.0, 0.0, 0.0]);

        let cut = greedy_extreme_point(&[1.0, 1.0, 1.0, 1.0], &[0, 1, 2, 3]).unwrap();
        let expect = [
            1.0,
            2.0f64.sqrt() - 1.0,
            3.0f64.sqrt() - 2.0f64.sqrt(),
            2.0 - 3.0f64.sqrt(),
        ];
        for (got, want) in cut.pi.iter().zip(expect) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn coefficients_are_nonnegative_and_sum_to_sigma() {
        let q = [3.0, 0.5, 7.0, 2.0];
        let cut = greedy_extreme_point(&q, &[2, 0, 3, 1]).unwrap();
        assert!(cut.pi.iter().all(|&p| p >= 0.0));
        let total: f64 = cut.pi.iter().sum();
        assert!((total - q.iter().sum::<f64>().sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(greedy_extreme_point(&[-1.0], &[0]).is_err());
        assert!(greedy_extreme_point(&[1.0, 2.0], &[0, 0]).is_err());
        assert!(greedy_extreme_point(&[1.0, 2.0], &[1]).is_err());
    }

    #[test]
    fn separation_finds_the_documented_cuts() {
        // Violated epigraph point.
        let cut = separate(&[10.0, 5.0], &[1.0, 0.0], 3.0).unwrap().unwrap();
        assert_eq!(cut.permutation, vec![0, 1]);
        let lhs: f64 = cut.pi[0];
        assert!(lhs - 3.0 > 0.0 && (lhs - 10.0f64.sqrt()).abs() < 1e-12);

        // Feasible epigraph points yield no cut.
        for x in [[1.0f64, 0.0], [0.0, 1.0], [1.0, 1.0]] {
            let w = (10.0 * x[0] + 5.0 * x[1]).sqrt();
            assert!(separate(&[10.0, 5.0], &x, w).unwrap().is_none());
        }

        // Fractional point.
        let cut = separate(&[1.0, 1.0], &[0.5, 0.5], 0.5).unwrap().unwrap();
        let lhs: f64 = cut.pi.iter().zip([0.5, 0.5]).map(|(p, x)| p * x).sum();
        assert!((lhs - 0.5 * 2.0f64.sqrt()).abs() < 1e-12);
        assert!(lhs > 0.5);
    }

    #[test]
    fn validation_accepts_greedy_rejects_perturbed() {
        let q = [1.0, 1.0];
        let cut = greedy_extreme_point(&q, &[0, 1]).unwrap();
        assert!(validate_cut(&cut, &q).unwrap());
        let mut bad = cut.clone();
        bad.pi[0] += 0.01;
        assert!(!validate_cut(&bad, &q).unwrap());
    }

    #[test]
    fn zero_variance_admits_only_the_zero_cut() {
        let q = [0.0, 0.0];
        let cut = greedy_extreme_point(&q, &[1, 0]).unwrap();
        assert_eq!(cut.pi, vec![0.0, 0.0]);
        assert!(validate_cut(&cut, &q).unwrap());
        let nonzero = PolymatroidCut {
            pi: vec![0.01, 0.0],
            permutation: vec![0, 1],
        };
        assert!(!validate_cut(&nonzero, &q).unwrap());
    }

    #[test]
    fn text_row_format_is_stable() {
        let cut = greedy_extreme_point(&[4.0, 0.0], &[0, 1]).unwrap();
        assert_eq!(cut.to_text_row(), "perm=[0,1] pi=[2,0] w >= pi.x");
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 1 {
            return vec![vec![0]];
        }
        let mut out = Vec::new();
        for rest in permutations(n - 1) {
            for pos in 0..=rest.len() {
                let mut p: Vec<usize> = rest.iter().map(|&v| v + 1).collect();
                p.insert(pos, 0);
                out.push(p);
            }
        }
        out
    }

    #[test]
    fn sorted_permutation_maximizes_violation() {
        let mut state = 11u64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 33) % 1000) as f64 / 1000.0
        };
        for _case in 0..30 {
            let n = 5;
            let q: Vec<f64> = (0..n).map(|_| next() * 4.0).collect();
            let x: Vec<f64> = (0..n).map(|_| next()).collect();
            let w = next() * 2.0;
            let mut best = f64::NEG_INFINITY;
            for perm in permutations(n) {
                let cut = greedy_extreme_point(&q, &perm).unwrap();
                let lhs: f64 = cut.pi.iter().zip(&x).map(|(p, xi)| p * xi).sum();
                best = best.max(lhs - w);
            }
            let found = separate(&q, &x, w).unwrap();
            match found {
                Some(cut) => {
                    let lhs: f64 = cut.pi.iter().zip(&x).map(|(p, xi)| p * xi).sum();
                    assert!((lhs - w - best).abs() <= 1e-9, "violation not maximal");
                    assert!(best > 1e-9);
                }
                None => assert!(best <= 1e-9, "missed a violated permutation: {best}"),
            }
        }
    }

    proptest! {
        // sigma(T) = sqrt(q(T)) has decreasing marginal gains.
        #[test]
        fn square_root_set_function_is_submodular(
            q in proptest::collection::vec(0.0f64..5.0, 6),
        ) {
            let n = q.len();
            let sigma = |mask: u32| -> f64 {
                (0..n).filter(|i| (mask >> i) & 1 == 1).map(|i| q[i]).sum::<f64>().sqrt()
            };
            for small in 0..(1u32 << n) {
                for add in 0..n {
                    if (small >> add) & 1 == 1 {
                        continue;
                    }
                    // One superset step is enough under exhaustive masks.
                    for extra in 0..n {
                        if extra == add || (small >> extra) & 1 == 1 {
                            continue;
                        }
                        let big = small | (1 << extra);
                        let gain_small = sigma(small | (1 << add)) - sigma(small);
                        let gain_big = sigma(big | (1 << add)) - sigma(big);
                        prop_assert!(gain_small >= gain_big - 1e-9);
                    }
                }
            }
        }

        #[test]
        fn every_greedy_cut_is_valid(
            q in proptest::collection::vec(0.0f64..9.0, 6),
            shuffle_seed in 0u64..1000,
        ) {
            let n = q.len();
            let mut perm: Vec<usize> = (0..n).collect();
            let mut s = shuffle_seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let j = (s >> 33) as usize % (i + 1);
                perm.swap(i, j);
            }
            let cut = greedy_extreme_point(&q, &perm).unwrap();
            prop_assert!(validate_cut(&cut, &q).unwrap());
        }
    }
}
