//! Small dense-matrix helpers: storage, symmetric eigenvalues (Jacobi), and
//! the pivoted factorization used to certify positive semidefiniteness.
//!
//! These are reference-grade routines for desk-scale matrices; nothing here
//! is tuned for large dimensions.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn new(rows: usize, cols: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::argument(format!(
                "matrix data length {} does not match {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> S {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    /// `self * v` for a column vector `v`.
    pub fn matvec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| dot(self.row(i), v))
            .collect()
    }

    /// `self' * v`.
    pub fn transpose_matvec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![S::zero(); self.cols];
        for i in 0..self.rows {
            let vi = v[i];
            for (j, o) in out.iter_mut().enumerate() {
                *o += self.get(i, j) * vi;
            }
        }
        out
    }
}

#[inline]
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

#[inline]
pub fn norm2<S: Scalar>(a: &[S]) -> S {
    dot(a, a).sqrt()
}

/// Outcome of the pivoted Cholesky-style check.
pub(crate) fn psd_pivot_check<S: Scalar>(n: usize, entries: &[S], pivot_tol: S) -> bool {
    debug_assert_eq!(entries.len(), n * n);
    let mut a = entries.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let at = |a: &[S], i: usize, j: usize| a[i * n + j];

    let mut trace = S::zero();
    for i in 0..n {
        trace += at(&a, i, i);
    }
    // Pivots at or above -pivot_tol count as nonnegative; a tiny positive
    // threshold decides when the remainder is numerically zero.
    let zero_tol = pivot_tol.abs().max(S::of(1e-14) * trace.abs());

    for k in 0..n {
        // Largest remaining diagonal element becomes the pivot.
        let mut p = k;
        let mut best = at(&a, k, k);
        for i in k + 1..n {
            if at(&a, i, i) > best {
                best = at(&a, i, i);
                p = i;
            }
        }
        if p != k {
            perm.swap(k, p);
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            for i in 0..n {
                a.swap(i * n + k, i * n + p);
            }
        }
        let d = at(&a, k, k);
        if d <= zero_tol {
            // Remainder is numerically zero; it must not hide a negative pivot.
            return (k..n).all(|i| at(&a, i, i) >= -pivot_tol);
        }
        let root = d.sqrt();
        for i in k + 1..n {
            let l = at(&a, i, k) / root;
            a[i * n + k] = l;
        }
        for i in k + 1..n {
            let lik = at(&a, i, k);
            for j in k + 1..=i {
                let upd = lik * at(&a, j, k);
                a[i * n + j] = at(&a, i, j) - upd;
                a[j * n + i] = a[i * n + j];
            }
        }
    }
    true
}

/// All eigenvalues of a symmetric matrix by cyclic Jacobi rotations,
/// sorted ascending. Exact reference for the validation suites.
pub fn sym_eigenvalues<S: Scalar>(m: &Matrix<S>) -> Result<Vec<S>> {
    if m.rows() != m.cols() {
        return Err(Error::argument("eigenvalues require a square matrix"));
    }
    let n = m.rows();
    let mut a = m.clone();
    let scale = a
        .data()
        .iter()
        .fold(S::zero(), |acc, &v| acc.max(v.abs()))
        .max(S::one());
    let tol = S::of(1e-14) * scale;

    for _sweep in 0..64 {
        let mut off = S::zero();
        for i in 0..n {
            for j in i + 1..n {
                off = off.max(a.get(i, j).abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq.abs() <= tol * S::of(1e-2) {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (S::of(2.0) * apq);
                let t = {
                    let sign = if theta >= S::zero() { S::one() } else { -S::one() };
                    sign / (theta.abs() + (theta * theta + S::one()).sqrt())
                };
                let c = S::one() / (t * t + S::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
            }
        }
    }
    let mut eig: Vec<S> = (0..n).map(|i| a.get(i, i)).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(eig)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_recovers_diagonal_spectrum() {
        let m = Matrix::<f64>::new(3, 3, vec![4.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 9.0]).unwrap();
        let eig = sym_eigenvalues(&m).unwrap();
        assert!((eig[0] - 1.0).abs() < 1e-12);
        assert!((eig[1] - 4.0).abs() < 1e-12);
        assert!((eig[2] - 9.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_handles_coupling() {
        // Eigenvalues of [[2,1],[1,2]] are 1 and 3.
        let m = Matrix::<f64>::new(2, 2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let eig = sym_eigenvalues(&m).unwrap();
        assert!((eig[0] - 1.0).abs() < 1e-12);
        assert!((eig[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn pivot_check_accepts_psd_rejects_indefinite() {
        assert!(psd_pivot_check(2, &[2.0, 1.0, 1.0, 2.0], 1e-9 * 4.0));
        assert!(!psd_pivot_check(2, &[1.0, 2.0, 2.0, 1.0], 1e-9 * 2.0));
        // Zero matrix is PSD.
        assert!(psd_pivot_check(2, &[0.0, 0.0, 0.0, 0.0], 0.0));
    }
}
