//! Small dense complex matrices and the Hermitian functional calculus.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex N×N matrix.
pub type CMat = DMatrix<Complex64>;

pub const fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(n: usize) -> CMat {
    CMat::zeros(n, n)
}

/// Matrix unit `E_{ij}` (zero-based indices).
pub fn unit(n: usize, i: usize, j: usize) -> CMat {
    let mut m = zeros(n);
    m[(i, j)] = c64(1.0, 0.0);
    m
}

pub fn from_real_diagonal(d: &[f64]) -> CMat {
    let mut m = zeros(d.len());
    for (i, &x) in d.iter().enumerate() {
        m[(i, i)] = c64(x, 0.0);
    }
    m
}

/// Row-major construction from `[re, im]` pairs.
pub fn from_row_major(n: usize, entries: &[[f64; 2]]) -> Result<CMat> {
    if entries.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            found: entries.len(),
        });
    }
    Ok(CMat::from_fn(n, n, |i, j| {
        let [re, im] = entries[i * n + j];
        c64(re, im)
    }))
}

pub fn to_row_major(m: &CMat) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push([m[(i, j)].re, m[(i, j)].im]);
        }
    }
    out
}

/// Largest entrywise deviation `|a_ij - conj(a_ji)|`.
pub fn hermitian_deviation(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn check_hermitian(m: &CMat, tol: f64) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let deviation = hermitian_deviation(m);
    if deviation > tol || !deviation.is_finite() {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// `(M + M*)/2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Eigendecomposition of the Hermitian part of `m`: eigenvalues in ascending
/// order and the matching orthonormal eigenvectors as columns.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMat::from_fn(m.nrows(), m.ncols(), |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

pub fn eigenvalue_range(m: &CMat) -> (f64, f64) {
    let (values, _) = eigh(m);
    (values[0], values[values.len() - 1])
}

/// Applies `f` to the spectrum of a Hermitian matrix: `U f(Λ) U*`.
pub fn hermitian_map(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (values, u) = eigh(m);
    let n = m.nrows();
    let mut scaled = u.clone();
    for j in 0..n {
        let s = f(values[j]);
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    hermitian_part(&(scaled * u.adjoint()))
}

/// Singular values in descending order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Spectral norm (largest singular value).
pub fn op_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    singular_values(m)[0]
}

pub fn min_singular_value(m: &CMat) -> f64 {
    singular_values(m).last().copied().unwrap_or(0.0)
}

pub fn inverse(m: &CMat) -> Result<CMat> {
    let smin = min_singular_value(m);
    if smin <= 1e-12 * op_norm(m).max(1.0) {
        return Err(Error::Singular {
            min_singular_value: smin,
        });
    }
    m.clone().try_inverse().ok_or(Error::Singular {
        min_singular_value: smin,
    })
}

/// Largest entrywise modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn conj(m: &CMat) -> CMat {
    m.map(|z| z.conj())
}

/// `A^{-T}`.
pub fn inverse_transpose(m: &CMat) -> Result<CMat> {
    Ok(inverse(m)?.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigh_sorts_ascending() {
        let m = from_real_diagonal(&[3.0, -1.0, 2.0]);
        let (vals, vecs) = eigh(&m);
        assert_eq!(vals, vec![-1.0, 2.0, 3.0]);
        let recon = &vecs * from_real_diagonal(&vals) * vecs.adjoint();
        assert!((recon - m).norm() < 1e-14);
    }

    #[test]
    fn complex_hermitian_eigenvalues() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let m = CMat::from_row_slice(2, 2, &[c64(2.0, 0.0), c64(0.0, 1.0), c64(0.0, -1.0), c64(2.0, 0.0)]);
        let (lo, hi) = eigenvalue_range(&m);
        assert!((lo - 1.0).abs() < 1e-14 && (hi - 3.0).abs() < 1e-14);
    }

    #[test]
    fn hermitian_check_rejects_skew() {
        let m = CMat::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(1.0, 0.0), c64(-1.0, 0.0), c64(1.0, 0.0)]);
        assert!(matches!(check_hermitian(&m, 1e-10), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn op_norm_of_diagonal() {
        assert!((op_norm(&from_real_diagonal(&[-5.0, 2.0])) - 5.0).abs() < 1e-14);
    }

    #[test]
    fn inverse_of_singular_fails() {
        let m = from_real_diagonal(&[1.0, 0.0]);
        assert!(matches!(inverse(&m), Err(Error::Singular { .. })));
    }
}
