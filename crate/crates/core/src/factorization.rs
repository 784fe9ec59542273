//! Outer-function values `F_W(0)` of matrix weights on the circle.
//!
//! A weight `W` with `cI ≤ W ≤ CI` is rescaled to `W/λ = I + Δ` with
//! `λ = (c+C)/2`, so that `‖Δ‖_∞ ≤ (C−c)/(C+c) < 1`. The analytic part
//! `Ψ = Σ_{n≥1} Ψ_n γⁿ` solves the truncated Toeplitz system
//!
//! ```text
//! Ψ_m + Σ_{n=1}^{M} Δ̂(m−n) Ψ_n = Δ̂(m),   1 ≤ m ≤ M,
//! ```
//!
//! and with `Φ = I − Ψ` the product `Φ(γ)* W(γ) Φ(γ)` is the constant
//! `|F_W(0)|²`. Its mean is evaluated exactly from Fourier coefficients.
//!
//! For weights with jumps the truncated value converges like `1/M`;
//! [`FactorOptions::extrapolate`] combines truncations `M` and `M/2` by
//! Richardson extrapolation to remove the leading term.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::fourier::{self, MatrixCircleFunction, MatrixFourierCoeffs};
use crate::matrix::{self, CMat};
use crate::toeplitz::{BlockToeplitz, BlockVec};

/// Eigenvalue floor below which a weight is rejected.
pub const PD_FLOOR: f64 = 1e-12;
/// Stopping threshold on the Neumann update norm.
pub const NEUMANN_TOL: f64 = 1e-13;
/// Relative residual at which conjugate gradients stop.
pub const CG_TOL: f64 = 1e-14;
/// Default truncation `M`.
pub const DEFAULT_TRUNCATION: usize = 256;
/// RMS constancy residual above which the result is flagged.
pub const CONSTANCY_WARNING: f64 = 1e-6;

/// Essential eigenvalue bounds `c ≤ W(γ) ≤ C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightBounds {
    pub lower: f64,
    pub upper: f64,
}

pub fn weight_bounds(w: &MatrixCircleFunction) -> Result<WeightBounds> {
    w.check_hermitian()?;
    let mut lower = f64::INFINITY;
    let mut upper = f64::NEG_INFINITY;
    for v in w.values() {
        let (lo, hi) = matrix::eigenvalue_range(v);
        lower = lower.min(lo);
        upper = upper.max(hi);
    }
    if !(lower > PD_FLOOR) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: lower });
    }
    Ok(WeightBounds { lower, upper })
}

/// `W = λ(I + Δ)` with `‖Δ‖_∞ = contraction < 1`.
#[derive(Debug, Clone)]
pub struct NormalizedPerturbation {
    pub lambda: f64,
    pub delta: MatrixCircleFunction,
    pub contraction: f64,
}

pub fn normalize(w: &MatrixCircleFunction) -> Result<NormalizedPerturbation> {
    let b = weight_bounds(w)?;
    let lambda = 0.5 * (b.lower + b.upper);
    let n = w.dim();
    let delta = w.map_values(|v| Ok(matrix::hermitian_part(&(v / Complex64::new(lambda, 0.0) - matrix::identity(n)))))?;
    let contraction = delta.sup_norm();
    debug_assert!(contraction <= (b.upper - b.lower) / (b.upper + b.lower) + 1e-12);
    Ok(NormalizedPerturbation {
        lambda,
        delta,
        contraction,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveMethod {
    /// Dense LU of the `MN × MN` block system.
    Direct,
    /// Fixed-point iteration `Ψ ← P₊Δ − T_Δ Ψ` (the Neumann series).
    Neumann,
    /// Conjugate gradients on the Hermitian positive definite block system,
    /// with FFT matrix-vector products.
    ConjugateGradient,
    /// Direct for small systems, conjugate gradients otherwise.
    #[default]
    Auto,
}

impl SolveMethod {
    fn resolve(self, unknowns: usize) -> SolveMethod {
        match self {
            SolveMethod::Auto if unknowns <= 512 => SolveMethod::Direct,
            SolveMethod::Auto => SolveMethod::ConjugateGradient,
            m => m,
        }
    }
}

/// Solution `Ψ` supported on `1 ≤ n ≤ M` with solver diagnostics.
#[derive(Debug, Clone)]
pub struct PsiSolution {
    pub psi: MatrixFourierCoeffs,
    pub method: SolveMethod,
    pub iterations: usize,
    /// Ratio of the last two Neumann update norms.
    pub neumann_ratio: Option<f64>,
}

/// Solves the truncated system `Ψ + P_M P₊(ΔΨ) = P_M P₊(Δ)`.
pub fn solve_psi(delta: &MatrixCircleFunction, m: usize, method: SolveMethod) -> Result<PsiSolution> {
    if m == 0 {
        return Err(Error::InvalidParameter("truncation must be at least 1".into()));
    }
    let coeffs = delta.fourier_coeffs(m)?;
    let contraction = delta.sup_norm();
    solve_psi_coeffs(&coeffs, m, contraction, method)
}

fn solve_psi_coeffs(coeffs: &MatrixFourierCoeffs, m: usize, contraction: f64, method: SolveMethod) -> Result<PsiSolution> {
    let dim = coeffs.dim();
    let op = BlockToeplitz::new(dim, m, |d| {
        let mut c = coeffs.coeff(d);
        if d == 0 {
            c += matrix::identity(dim);
        }
        c
    });
    let rhs_blocks: Vec<CMat> = (1..=m as i64).map(|n| coeffs.coeff(n)).collect();
    let rhs = BlockVec::from_blocks(dim, &rhs_blocks);
    let method = method.resolve(m * dim);
    let (x, iterations, neumann_ratio) = match method {
        SolveMethod::Direct => (solve_direct(&op, &rhs)?, 1, None),
        SolveMethod::Neumann => {
            let (x, it, ratio) = solve_neumann(&op, &rhs, contraction)?;
            (x, it, ratio)
        }
        SolveMethod::ConjugateGradient | SolveMethod::Auto => {
            let (x, it) = solve_cg(&op, &rhs)?;
            (x, it, None)
        }
    };
    let mut psi = MatrixFourierCoeffs::zeros(dim, m);
    for k in 0..m {
        *psi.get_mut(k as i64 + 1).expect("in range") = x.block(k);
    }
    Ok(PsiSolution {
        psi,
        method,
        iterations,
        neumann_ratio,
    })
}

/// One LU factorization shared by the `N` decoupled columns of `Ψ`.
fn solve_direct(op: &BlockToeplitz, rhs: &BlockVec) -> Result<BlockVec> {
    let d = op.dim();
    let size = op.size();
    let a = op.dense();
    let mut b = CMat::zeros(size * d, d);
    for k in 0..size {
        b.view_mut((k * d, 0), (d, d)).copy_from(&rhs.block(k));
    }
    let lu = a.lu();
    let x = lu.solve(&b).ok_or(Error::SingularSystem)?;
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::SingularSystem);
    }
    let mut out = BlockVec::zeros(d, size);
    for k in 0..size {
        out.set_block(k, &x.view((k * d, 0), (d, d)).into_owned());
    }
    Ok(out)
}

/// `x = Σ (−T)^k b` where `op = I + T`.
fn solve_neumann(op: &BlockToeplitz, rhs: &BlockVec, contraction: f64) -> Result<(BlockVec, usize, Option<f64>)> {
    if contraction >= 1.0 - 1e-9 {
        return Err(Error::NoConvergence { contraction });
    }
    let max_iter = if contraction <= 0.0 {
        2
    } else {
        ((10.0 * NEUMANN_TOL.ln() / contraction.ln()).ceil() as usize).max(2)
    };
    let mut x = rhs.clone();
    let mut prev_update: Option<f64> = None;
    let mut ratio = None;
    for it in 1..=max_iter {
        // x_next = b − T x = b − (op x − x)
        let ax = op.apply(&x);
        let mut next = rhs.clone();
        next.axpy(Complex64::new(-1.0, 0.0), &ax);
        next.axpy(Complex64::new(1.0, 0.0), &x);
        let mut diff = next.clone();
        diff.axpy(Complex64::new(-1.0, 0.0), &x);
        let update = diff.norm();
        if let Some(p) = prev_update {
            if p > 0.0 {
                ratio = Some(update / p);
            }
        }
        prev_update = Some(update);
        x = next;
        if update < NEUMANN_TOL {
            return Ok((x, it, ratio));
        }
    }
    Err(Error::NoConvergence { contraction })
}

fn solve_cg(op: &BlockToeplitz, rhs: &BlockVec) -> Result<(BlockVec, usize)> {
    let bnorm = rhs.norm();
    let mut x = BlockVec::zeros(rhs.dim, rhs.len());
    if bnorm == 0.0 {
        return Ok((x, 0));
    }
    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut rr = r.dot(&r).re;
    let max_iter = 20 * rhs.data.len().max(50);
    for it in 1..=max_iter {
        let ap = op.apply(&p);
        let pap = p.dot(&ap).re;
        if !(pap > 0.0) {
            return Err(Error::SingularSystem);
        }
        let alpha = rr / pap;
        x.axpy(Complex64::new(alpha, 0.0), &p);
        r.axpy(Complex64::new(-alpha, 0.0), &ap);
        let rr_next = r.dot(&r).re;
        if rr_next.sqrt() <= CG_TOL * bnorm {
            return Ok((x, it));
        }
        let beta = rr_next / rr;
        for (pi, ri) in p.data.iter_mut().zip(&r.data) {
            *pi = ri + *pi * beta;
        }
        rr = rr_next;
    }
    Err(Error::SolverStalled {
        iterations: max_iter,
        residual: rr.sqrt() / bnorm,
    })
}

/// Options for [`factor_at_zero`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorOptions {
    /// Truncation `M` of `Ψ`.
    pub truncation: usize,
    pub method: SolveMethod,
    /// Richardson-combine the results at `M` and `M/2`.
    pub extrapolate: bool,
}

impl Default for FactorOptions {
    fn default() -> Self {
        FactorOptions {
            truncation: DEFAULT_TRUNCATION,
            method: SolveMethod::Auto,
            extrapolate: false,
        }
    }
}

impl FactorOptions {
    pub fn with_truncation(truncation: usize) -> Self {
        FactorOptions {
            truncation,
            ..Self::default()
        }
    }

    pub fn extrapolated(truncation: usize) -> Self {
        FactorOptions {
            truncation,
            extrapolate: true,
            ..Self::default()
        }
    }

    pub fn method(mut self, method: SolveMethod) -> Self {
        self.method = method;
        self
    }

    /// Largest truncation the weight supports: sampled data carries
    /// coefficients up to `G/2 − 1` only.
    pub fn clamped_for(mut self, w: &MatrixCircleFunction) -> Self {
        if let Some(g) = w.grid_size() {
            self.truncation = self.truncation.min(g / 2 - 1);
        }
        self
    }
}

/// `|F_W(0)|²`, its positive square root and diagnostics.
#[derive(Debug, Clone)]
pub struct FactorizationResult {
    /// `|F_W(0)|²` (extrapolated when requested).
    pub m0: CMat,
    /// Positive square root of `m0`.
    pub f0: CMat,
    /// Value at truncation `M` before extrapolation.
    pub m0_truncated: CMat,
    /// `max_γ ‖Φ(γ)* W(γ) Φ(γ) − M0‖_op` on the diagnostic grid.
    pub constancy_residual: f64,
    /// Root mean square of the same deviation (Frobenius norm).
    pub constancy_rms: f64,
    /// The product is not constant to [`CONSTANCY_WARNING`]; never fatal.
    pub non_constant: bool,
    pub neumann_ratio: Option<f64>,
    pub contraction: f64,
    pub lambda: f64,
    pub truncation: usize,
    pub extrapolated: bool,
    pub iterations: usize,
    pub diagnostic_grid: usize,
}

struct TruncatedFactor {
    m0: CMat,
    phi: Vec<CMat>,
    iterations: usize,
    neumann_ratio: Option<f64>,
}

fn truncated_factor(norm: &NormalizedPerturbation, m: usize, method: SolveMethod) -> Result<TruncatedFactor> {
    let coeffs = norm.delta.fourier_coeffs(m)?;
    let sol = solve_psi_coeffs(&coeffs, m, norm.contraction, method)?;
    let dim = coeffs.dim();
    let mut phi = Vec::with_capacity(m + 1);
    phi.push(matrix::identity(dim));
    for n in 1..=m as i64 {
        phi.push(-sol.psi.coeff(n));
    }
    // ∫ Φ* (I + Δ) Φ dm = Σ_{j,k} Φ_j* Ŵ(j−k) Φ_k.
    let quad = BlockToeplitz::new(dim, m + 1, |d| {
        let mut c = coeffs.coeff(d);
        if d == 0 {
            c += matrix::identity(dim);
        }
        c
    });
    let y = quad.apply(&BlockVec::from_blocks(dim, &phi));
    let mut q = matrix::zeros(dim);
    for (k, p) in phi.iter().enumerate() {
        q += p.adjoint() * y.block(k);
    }
    let m0 = matrix::hermitian_part(&q) * Complex64::new(norm.lambda, 0.0);
    Ok(TruncatedFactor {
        m0,
        phi,
        iterations: sol.iterations,
        neumann_ratio: sol.neumann_ratio,
    })
}

/// Computes `|F_W(0)|²` and `F_W(0)`.
pub fn factor_at_zero(w: &MatrixCircleFunction, opts: FactorOptions) -> Result<FactorizationResult> {
    let m = opts.truncation;
    if m == 0 || (opts.extrapolate && m < 2) {
        return Err(Error::InvalidParameter(format!("truncation {m} too small")));
    }
    let norm = normalize(w)?;
    let fine = truncated_factor(&norm, m, opts.method)?;
    let mut iterations = fine.iterations;
    let m0 = if opts.extrapolate {
        let coarse = truncated_factor(&norm, m / 2, opts.method)?;
        iterations += coarse.iterations;
        // Leading error term is proportional to 1/M.
        let r = m as f64 / (m / 2) as f64;
        let combo = (&fine.m0 * Complex64::new(r, 0.0) - &coarse.m0) / Complex64::new(r - 1.0, 0.0);
        matrix::hermitian_part(&combo)
    } else {
        fine.m0.clone()
    };
    let (constancy_residual, constancy_rms, diagnostic_grid) = constancy(w, &norm, &fine)?;
    let (lo, _) = matrix::eigenvalue_range(&m0);
    if !(lo > PD_FLOOR) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: lo });
    }
    let f0 = matrix::hermitian_map(&m0, f64::sqrt);
    Ok(FactorizationResult {
        m0,
        f0,
        m0_truncated: fine.m0,
        constancy_residual,
        constancy_rms,
        non_constant: constancy_rms > CONSTANCY_WARNING,
        neumann_ratio: fine.neumann_ratio,
        contraction: norm.contraction,
        lambda: norm.lambda,
        truncation: m,
        extrapolated: opts.extrapolate,
        iterations,
        diagnostic_grid,
    })
}

/// Deviation of `Φ* W Φ` from its mean. Piecewise weights use
/// `max(1024, 8M)` points offset by half a cell (arc endpoints are avoided);
/// sampled weights use their own grid.
fn constancy(w: &MatrixCircleFunction, norm: &NormalizedPerturbation, t: &TruncatedFactor) -> Result<(f64, f64, usize)> {
    let m = t.phi.len() - 1;
    let dim = w.dim();
    let (grid, offset) = match w.grid_size() {
        Some(g) => (g, 0.0),
        None => ((8 * m).max(1024).next_power_of_two(), 0.5),
    };
    // Φ(θ_j) = Σ_k Φ_k e^{ik θ_j} with θ_j = 2π(j + offset)/grid.
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(grid);
    let mut phi_grid = vec![matrix::zeros(dim); grid];
    let mut buf = vec![Complex64::new(0.0, 0.0); grid];
    for r in 0..dim {
        for c in 0..dim {
            buf.fill(Complex64::new(0.0, 0.0));
            for (k, p) in t.phi.iter().enumerate() {
                let shift = Complex64::from_polar(1.0, TAU * offset * k as f64 / grid as f64);
                buf[k % grid] += p[(r, c)] * shift;
            }
            ifft.process(&mut buf);
            for (pg, b) in phi_grid.iter_mut().zip(&buf) {
                pg[(r, c)] = *b;
            }
        }
    }
    let lam = Complex64::new(norm.lambda, 0.0);
    let mut worst: f64 = 0.0;
    let mut sq = 0.0;
    let sampled = w.grid_size().is_some();
    for (j, p) in phi_grid.iter().enumerate() {
        let theta = TAU * (j as f64 + offset) / grid as f64;
        let wv = if sampled { w.values()[j].clone() } else { w.value_at(theta) };
        let g = p.adjoint() * (wv / lam) * p * lam - &t.m0;
        worst = worst.max(matrix::op_norm(&g));
        sq += g.norm_squared();
    }
    Ok((worst, (sq / grid as f64).sqrt(), grid))
}

/// `I + εΔ̂(0) − ε² Σ_{n≥1} |Δ̂(n)|²`.
pub fn second_order_approx(delta: &MatrixCircleFunction, eps: f64, n_max: u64) -> Result<CMat> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon {eps} must be nonnegative")));
    }
    if eps * delta.sup_norm() >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "epsilon {eps} times sup norm {} is not below 1",
            delta.sup_norm()
        )));
    }
    let energy = fourier::pplus_energy(delta, n_max)?;
    let c0 = delta.fourier_coeff(0)?;
    let n = delta.dim();
    Ok(matrix::identity(n) + c0 * Complex64::new(eps, 0.0) - energy.energy * Complex64::new(eps * eps, 0.0))
}

/// `H^t` for Hermitian positive definite `H`, via `UΛ^tU*`.
pub fn matrix_power_pos(h: &CMat, t: f64) -> Result<CMat> {
    matrix::check_hermitian(h, fourier::HERMITIAN_TOL)?;
    let (lo, _) = matrix::eigenvalue_range(h);
    if !(lo > PD_FLOOR) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: lo });
    }
    Ok(matrix::hermitian_map(h, |x| x.powf(t)))
}

/// `W^{(r)}(e^{iθ}) = [[√(1+r²), r e^{iθ}], [r e^{-iθ}, √(1+r²)]]`.
pub fn coupled_weight(r: f64, theta: f64) -> CMat {
    let s = (1.0 + r * r).sqrt();
    let e = Complex64::from_polar(r, theta);
    CMat::from_row_slice(2, 2, &[Complex64::new(s, 0.0), e, e.conj(), Complex64::new(s, 0.0)])
}

/// `W^{(r)}` sampled on `grid` points.
pub fn coupled_weight_sampled(r: f64, grid: usize) -> Result<MatrixCircleFunction> {
    MatrixCircleFunction::sample_fn(grid, |t| coupled_weight(r, t))
}

/// `diag(√(1+r²), 1/√(1+r²))`, the value of `|F(0)|²` for `W^{(r)}`.
pub fn coupled_weight_m0(r: f64) -> CMat {
    let s = (1.0 + r * r).sqrt();
    matrix::from_real_diagonal(&[s, 1.0 / s])
}
