//! Block Toeplitz operators `(x_n) ↦ (Σ_n c(m−n) x_n)` on finitely many
//! block indices, applied through FFT convolution.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::fourier::MatrixFourierCoeffs;
use crate::matrix::{self, CMat};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Block vector `(x_0, …, x_{len-1})` of `dim × dim` blocks, stored flat in
/// `[block][row][col]` order.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVec {
    pub dim: usize,
    pub data: Vec<Complex64>,
}

impl BlockVec {
    pub fn zeros(dim: usize, len: usize) -> Self {
        BlockVec {
            dim,
            data: vec![ZERO; len * dim * dim],
        }
    }

    pub fn from_blocks(dim: usize, blocks: &[CMat]) -> Self {
        let mut v = Self::zeros(dim, blocks.len());
        for (k, b) in blocks.iter().enumerate() {
            v.set_block(k, b);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.data.len() / (self.dim * self.dim)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn block(&self, k: usize) -> CMat {
        let d = self.dim;
        let off = k * d * d;
        CMat::from_fn(d, d, |i, j| self.data[off + i * d + j])
    }

    pub fn set_block(&mut self, k: usize, b: &CMat) {
        let d = self.dim;
        let off = k * d * d;
        for i in 0..d {
            for j in 0..d {
                self.data[off + i * d + j] = b[(i, j)];
            }
        }
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }

    /// `Σ conj(self)·other`.
    pub fn dot(&self, other: &BlockVec) -> Complex64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(ZERO, |acc, (a, b)| acc + a.conj() * b)
    }

    pub fn axpy(&mut self, alpha: Complex64, x: &BlockVec) {
        for (y, x) in self.data.iter_mut().zip(&x.data) {
            *y += alpha * x;
        }
    }
}

/// Compression of a block Toeplitz matrix to `size` block rows and columns,
/// with block `(m, n)` equal to `c(m − n)`.
pub struct BlockToeplitz {
    dim: usize,
    size: usize,
    fft_len: usize,
    /// FFT of the kernel, laid out `[frequency][row][col]`.
    kernel_hat: Vec<Complex64>,
    kernel: Vec<CMat>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl BlockToeplitz {
    /// `coeff(d)` is queried for `|d| ≤ size − 1`.
    pub fn new(dim: usize, size: usize, coeff: impl Fn(i64) -> CMat) -> Self {
        assert!(size >= 1 && dim >= 1);
        let fft_len = (2 * size).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(fft_len);
        let inverse = planner.plan_fft_inverse(fft_len);
        let s = size as i64;
        let kernel: Vec<CMat> = (-(s - 1)..s).map(&coeff).collect();
        let mut kernel_hat = vec![ZERO; fft_len * dim * dim];
        let mut buf = vec![ZERO; fft_len];
        for i in 0..dim {
            for j in 0..dim {
                buf.fill(ZERO);
                for d in -(s - 1)..s {
                    buf[d.rem_euclid(fft_len as i64) as usize] = kernel[(d + s - 1) as usize][(i, j)];
                }
                forward.process(&mut buf);
                for (f, b) in buf.iter().enumerate() {
                    kernel_hat[f * dim * dim + i * dim + j] = *b;
                }
            }
        }
        BlockToeplitz {
            dim,
            size,
            fft_len,
            kernel_hat,
            kernel,
            forward,
            inverse,
        }
    }

    /// Operator for a coefficient table; entries beyond its truncation are zero.
    pub fn from_coeffs(c: &MatrixFourierCoeffs, size: usize) -> Self {
        Self::new(c.dim(), size, |d| c.coeff(d))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn coeff(&self, d: i64) -> &CMat {
        &self.kernel[(d + self.size as i64 - 1) as usize]
    }

    /// `y_m = Σ_n c(m−n) x_n`.
    pub fn apply(&self, x: &BlockVec) -> BlockVec {
        assert_eq!(x.dim, self.dim);
        assert_eq!(x.len(), self.size);
        let d = self.dim;
        let l = self.fft_len;
        // Transform each entry sequence of x.
        let mut xhat = vec![ZERO; l * d * d];
        let mut buf = vec![ZERO; l];
        for j in 0..d {
            for k in 0..d {
                buf.fill(ZERO);
                for (n, b) in buf.iter_mut().take(self.size).enumerate() {
                    *b = x.data[n * d * d + j * d + k];
                }
                self.forward.process(&mut buf);
                for (f, b) in buf.iter().enumerate() {
                    xhat[f * d * d + j * d + k] = *b;
                }
            }
        }
        // Blockwise products per frequency.
        let mut yhat = vec![ZERO; l * d * d];
        for f in 0..l {
            let off = f * d * d;
            for i in 0..d {
                for k in 0..d {
                    let mut s = ZERO;
                    for j in 0..d {
                        s += self.kernel_hat[off + i * d + j] * xhat[off + j * d + k];
                    }
                    yhat[off + i * d + k] = s;
                }
            }
        }
        let mut y = BlockVec::zeros(d, self.size);
        let scale = 1.0 / l as f64;
        for i in 0..d {
            for k in 0..d {
                for f in 0..l {
                    buf[f] = yhat[f * d * d + i * d + k];
                }
                self.inverse.process(&mut buf);
                for (m, b) in buf.iter().take(self.size).enumerate() {
                    y.data[m * d * d + i * d + k] = b * scale;
                }
            }
        }
        y
    }

    /// Dense `(size·dim) × (size·dim)` matrix.
    pub fn dense(&self) -> CMat {
        let d = self.dim;
        let n = self.size * d;
        let mut a = CMat::zeros(n, n);
        for m in 0..self.size {
            for k in 0..self.size {
                let c = self.coeff(m as i64 - k as i64);
                a.view_mut((m * d, k * d), (d, d)).copy_from(c);
            }
        }
        a
    }
}

/// `T_Δ ψ`: left multiplication by `Δ`, projection onto frequencies `≥ 1`,
/// truncation to `1 ≤ m ≤ M` where `M` is the truncation of `psi`.
pub fn toeplitz_apply(delta: &MatrixFourierCoeffs, psi: &MatrixFourierCoeffs) -> Result<MatrixFourierCoeffs> {
    if delta.dim() != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: delta.dim(),
            found: psi.dim(),
        });
    }
    let m = psi.truncation();
    let mut out = MatrixFourierCoeffs::zeros(psi.dim(), m);
    if m == 0 {
        return Ok(out);
    }
    let op = BlockToeplitz::from_coeffs(delta, m);
    let blocks: Vec<CMat> = (1..=m as i64).map(|n| psi.coeff(n)).collect();
    let y = op.apply(&BlockVec::from_blocks(psi.dim(), &blocks));
    for k in 0..m {
        *out.get_mut(k as i64 + 1).expect("in range") = y.block(k);
    }
    Ok(out)
}

/// Reference product used to check the FFT path.
pub fn apply_naive(op: &BlockToeplitz, x: &BlockVec) -> BlockVec {
    let mut y = BlockVec::zeros(op.dim, op.size);
    for m in 0..op.size {
        let mut acc = matrix::zeros(op.dim);
        for n in 0..op.size {
            acc += op.coeff(m as i64 - n as i64) * x.block(n);
        }
        y.set_block(m, &acc);
    }
    y
}
