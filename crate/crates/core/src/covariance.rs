//! Covariance models: diagonal, dense symmetric PSD, and diagonal-plus-low-rank
//! factor form `Q = diag(sigma2) + E (H H') E'`.

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::scalar::Scalar;

/// Positive semidefinite covariance of the random coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub enum Covariance<S> {
    /// Independent coordinates, `Q = diag(q)` with `q >= 0`.
    Diagonal { q: Vec<S> },
    /// Full symmetric matrix, stored row-major.
    Dense { n: usize, entries: Vec<S> },
    /// `Q = diag(sigma2) + E F E'` with `F = H H'`; `exposure` is n x m and
    /// `factor_root` is the m x m root `H`.
    Factor {
        sigma2: Vec<S>,
        exposure: Matrix<S>,
        factor_root: Matrix<S>,
    },
}

impl<S: Scalar> Covariance<S> {
    pub fn diagonal(q: Vec<S>) -> Result<Self> {
        if q.iter().any(|v| !v.is_finite() || *v < S::zero()) {
            return Err(Error::argument("diagonal variances must be finite and >= 0"));
        }
        Ok(Covariance::Diagonal { q })
    }

    /// Validates symmetry (1e-12 relative) and positive semidefiniteness
    /// (pivoted factorization, pivots >= -1e-9 * trace).
    pub fn dense(n: usize, entries: Vec<S>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::argument(format!(
                "dense covariance needs {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::argument("dense covariance entries must be finite"));
        }
        let scale = entries
            .iter()
            .fold(S::zero(), |acc, &v| acc.max(v.abs()))
            .max(S::one());
        for i in 0..n {
            for j in i + 1..n {
                let d = (entries[i * n + j] - entries[j * n + i]).abs();
                if d > S::of(1e-12) * scale {
                    return Err(Error::model(format!(
                        "covariance not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        let trace: S = (0..n).map(|i| entries[i * n + i]).sum();
        if !linalg::psd_pivot_check(n, &entries, S::of(1e-9) * trace.abs()) {
            return Err(Error::model("covariance is not positive semidefinite"));
        }
        Ok(Covariance::Dense { n, entries })
    }

    /// PSD holds by construction: `E F E'` with `F = H H'` is PSD, so only
    /// `sigma2 >= 0` needs checking.
    pub fn factor(sigma2: Vec<S>, exposure: Matrix<S>, factor_root: Matrix<S>) -> Result<Self> {
        if sigma2.iter().any(|v| !v.is_finite() || *v < S::zero()) {
            return Err(Error::argument("sigma2 must be finite and >= 0"));
        }
        if exposure.rows() != sigma2.len() {
            return Err(Error::argument(format!(
                "exposure has {} rows, expected {}",
                exposure.rows(),
                sigma2.len()
            )));
        }
        if factor_root.rows() != exposure.cols() || factor_root.cols() != factor_root.rows() {
            return Err(Error::argument(format!(
                "factor root must be {m}x{m} to match exposure columns",
                m = exposure.cols()
            )));
        }
        Ok(Covariance::Factor {
            sigma2,
            exposure,
            factor_root,
        })
    }

    /// Dimension of the underlying coefficient vector.
    pub fn dim(&self) -> usize {
        match self {
            Covariance::Diagonal { q } => q.len(),
            Covariance::Dense { n, .. } => *n,
            Covariance::Factor { sigma2, .. } => sigma2.len(),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self, Covariance::Diagonal { .. })
    }

    /// Diagonal variances when this covariance is diagonal.
    pub fn diagonal_variances(&self) -> Option<&[S]> {
        match self {
            Covariance::Diagonal { q } => Some(q),
            _ => None,
        }
    }

    /// `x' Q x` for a real vector.
    pub fn quad_form(&self, x: &[S]) -> S {
        assert_eq!(x.len(), self.dim(), "quad_form dimension mismatch");
        match self {
            Covariance::Diagonal { q } => q.iter().zip(x).map(|(&qi, &xi)| qi * xi * xi).sum(),
            Covariance::Dense { n, entries } => {
                let mut acc = S::zero();
                for i in 0..*n {
                    let xi = x[i];
                    if xi == S::zero() {
                        continue;
                    }
                    acc += xi * linalg::dot(&entries[i * n..(i + 1) * n], x);
                }
                acc
            }
            Covariance::Factor {
                sigma2,
                exposure,
                factor_root,
            } => {
                let diag: S = sigma2.iter().zip(x).map(|(&s2, &xi)| s2 * xi * xi).sum();
                // x' E F E' x = |H' (E' x)|^2
                let etx = exposure.transpose_matvec(x);
                let hte = factor_root.transpose_matvec(&etx);
                diag + linalg::dot(&hte, &hte)
            }
        }
    }

    /// `x' Q x` for a binary vector. For the diagonal case this is exactly
    /// `q' x` since the entries square to themselves.
    pub fn quad_form_binary(&self, x: &[u8]) -> S {
        assert_eq!(x.len(), self.dim(), "quad_form dimension mismatch");
        match self {
            Covariance::Diagonal { q } => q
                .iter()
                .zip(x)
                .filter(|(_, &xi)| xi != 0)
                .map(|(&qi, _)| qi)
                .sum(),
            _ => {
                let xs: Vec<S> = x.iter().map(|&b| if b != 0 { S::one() } else { S::zero() }).collect();
                self.quad_form(&xs)
            }
        }
    }

    /// `Q v`.
    pub fn matvec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.dim(), "matvec dimension mismatch");
        match self {
            Covariance::Diagonal { q } => q.iter().zip(v).map(|(&qi, &vi)| qi * vi).collect(),
            Covariance::Dense { n, entries } => (0..*n)
                .map(|i| linalg::dot(&entries[i * n..(i + 1) * n], v))
                .collect(),
            Covariance::Factor {
                sigma2,
                exposure,
                factor_root,
            } => {
                let etv = exposure.transpose_matvec(v);
                let f_etv = factor_root.matvec(&factor_root.transpose_matvec(&etv));
                let low_rank = exposure.matvec(&f_etv);
                sigma2
                    .iter()
                    .zip(v)
                    .zip(low_rank)
                    .map(|((&s2, &vi), lr)| s2 * vi + lr)
                    .collect()
            }
        }
    }

    pub fn trace(&self) -> S {
        match self {
            Covariance::Diagonal { q } => q.iter().copied().sum(),
            Covariance::Dense { n, entries } => (0..*n).map(|i| entries[i * n + i]).sum(),
            Covariance::Factor { .. } => {
                let n = self.dim();
                let mut e = vec![S::zero(); n];
                let mut acc = S::zero();
                for i in 0..n {
                    e[i] = S::one();
                    acc += self.quad_form(&e);
                    e[i] = S::zero();
                }
                acc
            }
        }
    }

    /// Materialize as a dense matrix (desk-scale sizes only).
    pub fn densify(&self) -> Matrix<S> {
        let n = self.dim();
        let mut m = Matrix::zeros(n, n);
        match self {
            Covariance::Diagonal { q } => {
                for (i, &qi) in q.iter().enumerate() {
                    m.set(i, i, qi);
                }
            }
            Covariance::Dense { entries, .. } => {
                for i in 0..n {
                    for j in 0..n {
                        m.set(i, j, entries[i * n + j]);
                    }
                }
            }
            Covariance::Factor { .. } => {
                let mut unit = vec![S::zero(); n];
                for j in 0..n {
                    unit[j] = S::one();
                    let col = self.matvec(&unit);
                    for i in 0..n {
                        m.set(i, j, col[i]);
                    }
                    unit[j] = S::zero();
                }
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn example_factor() -> Covariance<f64> {
        // 3 coordinates, 2 factors.
        let exposure = Matrix::new(3, 2, vec![0.1, 0.0, 0.0, 0.2, 0.3, 0.1]).unwrap();
        let root = Matrix::new(2, 2, vec![1.0, 0.0, 0.5, 2.0]).unwrap();
        Covariance::factor(vec![1.0, 2.0, 3.0], exposure, root).unwrap()
    }

    #[test]
    fn diagonal_rejects_negative_variance() {
        assert!(Covariance::diagonal(vec![1.0, -0.5]).is_err());
    }

    #[test]
    fn dense_rejects_asymmetry_and_indefiniteness() {
        assert!(Covariance::dense(2, vec![1.0, 0.5, 0.4, 1.0]).is_err());
        assert!(Covariance::dense(2, vec![1.0, 2.0, 2.0, 1.0]).is_err());
        assert!(Covariance::dense(2, vec![2.0, 1.0, 1.0, 2.0]).is_ok());
    }

    #[test]
    fn binary_diagonal_quad_form_is_exact_subset_sum() {
        let cov = Covariance::diagonal(vec![10.0, 5.0, 0.25]).unwrap();
        assert_eq!(cov.quad_form_binary(&[1, 0, 1]), 10.25);
        assert_eq!(cov.quad_form_binary(&[0, 0, 0]), 0.0);
    }

    #[test]
    fn factor_matches_densified_quadratic() {
        let cov = example_factor();
        let dense = cov.densify();
        let n = cov.dim();
        let entries: Vec<f64> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| dense.get(i, j))
            .collect();
        let dense_cov = Covariance::dense(n, entries).unwrap();
        for x in [[1.0, 0.0, 1.0], [0.3, -0.7, 0.2], [1.0, 1.0, 1.0]] {
            let a = cov.quad_form(&x);
            let b = dense_cov.quad_form(&x);
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }

    #[test]
    fn factor_matches_dense_at_larger_dimension() {
        let mut state = 31u64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 33) % 10_000) as f64 / 10_000.0
        };
        let n = 50;
        let m = 8;
        let sigma2: Vec<f64> = (0..n).map(|_| 1.0 + next() * 9.0).collect();
        let e: Vec<f64> = (0..n * m)
            .map(|_| if next() < 0.2 { next() * 0.1 } else { 0.0 })
            .collect();
        let h: Vec<f64> = (0..m * m).map(|_| next() - 0.5).collect();
        let cov = Covariance::factor(
            sigma2,
            Matrix::new(n, m, e).unwrap(),
            Matrix::new(m, m, h).unwrap(),
        )
        .unwrap();
        let dense = cov.densify();
        for _case in 0..20 {
            let x: Vec<f64> = (0..n).map(|_| next() * 2.0 - 1.0).collect();
            let mut xtqx = 0.0;
            for i in 0..n {
                for j in 0..n {
                    xtqx += x[i] * dense.get(i, j) * x[j];
                }
            }
            let direct = cov.quad_form(&x);
            assert!((direct - xtqx).abs() <= 1e-9 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn matvec_agrees_with_densified() {
        let cov = example_factor();
        let dense = cov.densify();
        let v = [0.5, -1.0, 2.0];
        let got = cov.matvec(&v);
        let want = dense.matvec(&v);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn quadratic_form_is_nonnegative(
            seeds in proptest::collection::vec(-1.0f64..1.0, 9),
            x in proptest::collection::vec(-2.0f64..2.0, 3),
        ) {
            // A'A is PSD for any A.
            let mut entries = vec![0.0; 9];
            for i in 0..3 {
                for j in 0..3 {
                    let mut acc = 0.0;
                    for k in 0..3 {
                        acc += seeds[k * 3 + i] * seeds[k * 3 + j];
                    }
                    entries[i * 3 + j] = acc;
                }
            }
            let cov = Covariance::dense(3, entries).unwrap();
            prop_assert!(cov.quad_form(&x) >= -1e-12);
        }

        #[test]
        fn factor_form_matches_dense_on_random_vectors(
            s2 in proptest::collection::vec(0.0f64..4.0, 4),
            e in proptest::collection::vec(-0.5f64..0.5, 8),
            h in proptest::collection::vec(-1.0f64..1.0, 4),
            x in proptest::collection::vec(-1.0f64..1.0, 4),
        ) {
            let exposure = Matrix::new(4, 2, e).unwrap();
            let root = Matrix::new(2, 2, h).unwrap();
            let cov = Covariance::factor(s2, exposure, root).unwrap();
            let dense = cov.densify();
            let mut xtqx = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    xtqx += x[i] * dense.get(i, j) * x[j];
                }
            }
            let direct = cov.quad_form(&x);
            prop_assert!((direct - xtqx).abs() <= 1e-9 * direct.abs().max(1.0));
        }
    }
}
