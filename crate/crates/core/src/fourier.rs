//! Matrix-valued functions on the circle and their Fourier analysis:
//! coefficients, the analytic projection `P₊` onto frequencies `n ≥ 1`,
//! projected inner products and energies.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::circle::{Arc, ArcPartition};
use crate::error::{Error, Result};
use crate::matrix::{self, CMat};
use crate::series::{CompensatedComplexSum, CompensatedSum};

/// Entrywise tolerance for Hermitian input validation.
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Piecewise {
        partition: ArcPartition,
        values: Vec<CMat>,
    },
    Sampled {
        samples: Vec<CMat>,
    },
}

/// A matrix function on the circle, either constant on the arcs of a
/// partition or sampled on the uniform grid `γ_j = e^{2πij/G}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixCircleFunction {
    dim: usize,
    repr: Repr,
}

fn check_values(values: &[CMat]) -> Result<usize> {
    let first = values
        .first()
        .ok_or_else(|| Error::InvalidParameter("no matrix values".into()))?;
    let n = first.nrows();
    if n == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    for v in values {
        if v.nrows() != n || v.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.nrows().max(v.ncols()),
            });
        }
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite matrix entry".into()));
        }
    }
    Ok(n)
}

impl MatrixCircleFunction {
    pub fn piecewise(partition: ArcPartition, values: Vec<CMat>) -> Result<Self> {
        if values.len() != partition.len() {
            return Err(Error::DimensionMismatch {
                expected: partition.len(),
                found: values.len(),
            });
        }
        let dim = check_values(&values)?;
        Ok(MatrixCircleFunction {
            dim,
            repr: Repr::Piecewise { partition, values },
        })
    }

    pub fn sampled(samples: Vec<CMat>) -> Result<Self> {
        let g = samples.len();
        if g < 2 || !g.is_power_of_two() {
            return Err(Error::InvalidGrid(g));
        }
        let dim = check_values(&samples)?;
        Ok(MatrixCircleFunction {
            dim,
            repr: Repr::Sampled { samples },
        })
    }

    /// Samples `f(θ_j)` at `θ_j = 2πj/grid`.
    pub fn sample_fn(grid: usize, f: impl Fn(f64) -> CMat) -> Result<Self> {
        let samples = (0..grid).map(|j| f(grid_angle(j, grid))).collect();
        Self::sampled(samples)
    }

    pub fn constant(value: CMat) -> Result<Self> {
        Self::piecewise(ArcPartition::new(vec![Arc::full()])?, vec![value])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_piecewise(&self) -> bool {
        matches!(self.repr, Repr::Piecewise { .. })
    }

    pub fn partition(&self) -> Option<&ArcPartition> {
        match &self.repr {
            Repr::Piecewise { partition, .. } => Some(partition),
            Repr::Sampled { .. } => None,
        }
    }

    pub fn grid_size(&self) -> Option<usize> {
        match &self.repr {
            Repr::Sampled { samples } => Some(samples.len()),
            Repr::Piecewise { .. } => None,
        }
    }

    /// The arc values or the grid samples.
    pub fn values(&self) -> &[CMat] {
        match &self.repr {
            Repr::Piecewise { values, .. } => values,
            Repr::Sampled { samples } => samples,
        }
    }

    /// Applies `f` to every value or sample, keeping the representation.
    pub fn map_values(&self, f: impl Fn(&CMat) -> Result<CMat>) -> Result<Self> {
        let mapped = self.values().iter().map(f).collect::<Result<Vec<_>>>()?;
        match &self.repr {
            Repr::Piecewise { partition, .. } => Self::piecewise(partition.clone(), mapped),
            Repr::Sampled { .. } => Self::sampled(mapped),
        }
    }

    pub fn check_hermitian(&self) -> Result<()> {
        for v in self.values() {
            matrix::check_hermitian(v, HERMITIAN_TOL)?;
        }
        Ok(())
    }

    /// `max ‖f(γ)‖_op` over pieces or samples.
    pub fn sup_norm(&self) -> f64 {
        self.values().iter().map(matrix::op_norm).fold(0.0, f64::max)
    }

    /// Value at `theta`. Sampled functions are evaluated through their
    /// trigonometric interpolant, which reproduces the samples on the grid.
    pub fn value_at(&self, theta: f64) -> CMat {
        match &self.repr {
            Repr::Piecewise { partition, values } => {
                let k = partition.locate(theta).unwrap_or(0);
                values[k].clone()
            }
            Repr::Sampled { .. } => SampledInterpolant::new(self)
                .expect("sampled function")
                .eval(theta),
        }
    }

    /// Fourier coefficient `∫ f(γ) γ^{-n} dm`: exact for piecewise functions,
    /// the grid quadrature `(1/G) Σ_j f(γ_j) γ_j^{-n}` for sampled ones.
    pub fn fourier_coeff(&self, n: i64) -> Result<CMat> {
        match &self.repr {
            Repr::Piecewise { partition, values } => Ok(piecewise_coeff(partition, values, n)),
            Repr::Sampled { samples } => {
                let g = samples.len();
                check_alias(n, g)?;
                let mut acc = matrix::zeros(self.dim);
                for (j, s) in samples.iter().enumerate() {
                    let phase = Complex64::from_polar(1.0, -TAU * ((n * j as i64).rem_euclid(g as i64)) as f64 / g as f64);
                    acc += s * phase;
                }
                Ok(acc / Complex64::new(g as f64, 0.0))
            }
        }
    }

    /// Coefficients for `-m ≤ n ≤ m`.
    pub fn fourier_coeffs(&self, m: usize) -> Result<MatrixFourierCoeffs> {
        let mi = m as i64;
        match &self.repr {
            Repr::Piecewise { partition, values } => {
                let coeffs = (-mi..=mi)
                    .map(|n| piecewise_coeff(partition, values, n))
                    .collect();
                Ok(MatrixFourierCoeffs {
                    dim: self.dim,
                    truncation: m,
                    coeffs,
                })
            }
            Repr::Sampled { samples } => {
                let g = samples.len();
                check_alias(mi, g)?;
                let dft = sampled_dft(samples, self.dim);
                let coeffs = (-mi..=mi)
                    .map(|n| dft[n.rem_euclid(g as i64) as usize].clone())
                    .collect();
                Ok(MatrixFourierCoeffs {
                    dim: self.dim,
                    truncation: m,
                    coeffs,
                })
            }
        }
    }

    /// `f∘S` with `S(γ) = γ̄`.
    pub fn conjugated(&self) -> Self {
        match &self.repr {
            Repr::Piecewise { partition, values } => MatrixCircleFunction {
                dim: self.dim,
                repr: Repr::Piecewise {
                    partition: partition.conjugated(),
                    values: values.clone(),
                },
            },
            Repr::Sampled { samples } => {
                let g = samples.len();
                MatrixCircleFunction {
                    dim: self.dim,
                    repr: Repr::Sampled {
                        samples: (0..g).map(|j| samples[(g - j) % g].clone()).collect(),
                    },
                }
            }
        }
    }
}

pub fn grid_angle(j: usize, grid: usize) -> f64 {
    TAU * j as f64 / grid as f64
}

fn check_alias(n: i64, grid: usize) -> Result<()> {
    let limit = grid as i64 / 2 - 1;
    if n.abs() > limit {
        return Err(Error::SampledAliasing {
            index: n,
            grid,
            limit,
        });
    }
    Ok(())
}

fn piecewise_coeff(partition: &ArcPartition, values: &[CMat], n: i64) -> CMat {
    let dim = values[0].nrows();
    let mut acc = matrix::zeros(dim);
    if n == 0 {
        for (arc, v) in partition.arcs().iter().zip(values) {
            acc += v * Complex64::new(arc.measure(), 0.0);
        }
        return acc;
    }
    // Σ_arcs 1̂_arc(n) = 0 for n ≠ 0, so values can be taken relative to the
    // first one; this keeps the sum small when the pieces are close.
    let base = &values[0];
    for (arc, v) in partition.arcs().iter().zip(values).skip(1) {
        acc += (v - base) * arc.indicator_fourier(n);
    }
    acc
}

/// `(1/G) Σ_j f(γ_j) e^{-2πijk/G}` for every `k` in `0..G`.
fn sampled_dft(samples: &[CMat], dim: usize) -> Vec<CMat> {
    let g = samples.len();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(g);
    let mut out = vec![matrix::zeros(dim); g];
    let mut buf = vec![Complex64::new(0.0, 0.0); g];
    let scale = 1.0 / g as f64;
    for r in 0..dim {
        for c in 0..dim {
            for (b, s) in buf.iter_mut().zip(samples) {
                *b = s[(r, c)];
            }
            fft.process(&mut buf);
            for (o, b) in out.iter_mut().zip(&buf) {
                o[(r, c)] = b * scale;
            }
        }
    }
    out
}

/// Trigonometric interpolant of a sampled function, for evaluation off-grid.
pub struct SampledInterpolant {
    dim: usize,
    grid: usize,
    /// Coefficients indexed `0..G` with negative frequencies wrapped,
    /// each stored column-major.
    dft: Vec<Vec<Complex64>>,
}

impl SampledInterpolant {
    pub fn new(f: &MatrixCircleFunction) -> Result<Self> {
        match &f.repr {
            Repr::Sampled { samples } => Ok(SampledInterpolant {
                dim: f.dim,
                grid: samples.len(),
                dft: sampled_dft(samples, f.dim)
                    .into_iter()
                    .map(|m| m.as_slice().to_vec())
                    .collect(),
            }),
            Repr::Piecewise { .. } => Err(Error::IncompatibleRepresentation(
                "interpolant needs sampled data".into(),
            )),
        }
    }

    pub fn eval(&self, theta: f64) -> CMat {
        let g = self.grid;
        let half = g / 2;
        let d2 = self.dim * self.dim;
        let mut acc = vec![Complex64::new(0.0, 0.0); d2];
        // n = 0 and the conjugate pairs ±n, with e^{inθ} generated by recurrence
        // and refreshed every 64 steps.
        for (a, c) in acc.iter_mut().zip(self.dft[0].iter()) {
            *a += c;
        }
        let step = Complex64::from_polar(1.0, theta);
        let mut w = step;
        for n in 1..half {
            if n % 64 == 0 {
                w = Complex64::from_polar(1.0, n as f64 * theta);
            }
            let wc = w.conj();
            let pos = &self.dft[n];
            let neg = &self.dft[g - n];
            for k in 0..d2 {
                acc[k] += pos[k] * w + neg[k] * wc;
            }
            w *= step;
        }
        // Split Nyquist term so grid values are reproduced exactly.
        let nyq = (half as f64 * theta).cos();
        for (a, c) in acc.iter_mut().zip(self.dft[half].iter()) {
            *a += c * nyq;
        }
        CMat::from_column_slice(self.dim, self.dim, &acc)
    }
}

/// Truncated two-sided table `c_n`, `-M ≤ n ≤ M`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFourierCoeffs {
    dim: usize,
    truncation: usize,
    coeffs: Vec<CMat>,
}

impl MatrixFourierCoeffs {
    pub fn zeros(dim: usize, truncation: usize) -> Self {
        MatrixFourierCoeffs {
            dim,
            truncation,
            coeffs: vec![matrix::zeros(dim); 2 * truncation + 1],
        }
    }

    /// Builds a table from `(n, c_n)` pairs; unspecified entries are zero.
    pub fn from_entries(dim: usize, truncation: usize, entries: Vec<(i64, CMat)>) -> Result<Self> {
        let mut c = Self::zeros(dim, truncation);
        for (n, m) in entries {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.nrows(),
                });
            }
            *c.get_mut(n).ok_or_else(|| Error::InvalidParameter(format!("index {n} beyond truncation")))? = m;
        }
        Ok(c)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn get(&self, n: i64) -> Option<&CMat> {
        let m = self.truncation as i64;
        if n.abs() > m {
            return None;
        }
        self.coeffs.get((n + m) as usize)
    }

    /// `c_n`, or zero outside the stored range.
    pub fn coeff(&self, n: i64) -> CMat {
        self.get(n).cloned().unwrap_or_else(|| matrix::zeros(self.dim))
    }

    pub fn get_mut(&mut self, n: i64) -> Option<&mut CMat> {
        let m = self.truncation as i64;
        if n.abs() > m {
            return None;
        }
        self.coeffs.get_mut((n + m) as usize)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &CMat)> {
        let m = self.truncation as i64;
        self.coeffs.iter().enumerate().map(move |(k, c)| (k as i64 - m, c))
    }

    /// `max_n ‖c_{-n} - c_n*‖` entrywise.
    pub fn hermitian_symmetry_defect(&self) -> f64 {
        let m = self.truncation as i64;
        (0..=m)
            .map(|n| matrix::max_abs(&(self.coeff(-n) - self.coeff(n).adjoint())))
            .fold(0.0, f64::max)
    }
}

/// `∫_arc γ^{-n} dm`.
pub fn indicator_fourier(arc: &Arc, n: i64) -> Complex64 {
    arc.indicator_fourier(n)
}

pub fn fourier_coeff(f: &MatrixCircleFunction, n: i64) -> Result<CMat> {
    f.fourier_coeff(n)
}

/// `P₊`: zero every coefficient with `n ≤ 0`.
pub fn project_plus(c: &MatrixFourierCoeffs) -> MatrixFourierCoeffs {
    let mut out = c.clone();
    for n in -(c.truncation as i64)..=0 {
        *out.get_mut(n).expect("in range") = matrix::zeros(c.dim);
    }
    out
}

/// `Σ_n c_n e^{inθ}`.
pub fn evaluate(c: &MatrixFourierCoeffs, theta: f64) -> CMat {
    let mut acc = matrix::zeros(c.dim);
    for (n, cn) in c.iter() {
        acc += cn * Complex64::from_polar(1.0, n as f64 * theta);
    }
    acc
}

/// A truncated series value with a rigorous bound on the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedInnerProduct {
    pub value: Complex64,
    pub tail_bound: f64,
}

/// `⟨P₊1_a, P₊1_b⟩_{L²} = Σ_{n≥1} 1̂_a(n)·conj(1̂_b(n))`, summed to `n_max`
/// with compensation. The inner product is linear in its first argument.
/// The tail uses `|1̂(n)| ≤ 1/(πn)`.
pub fn pplus_inner_product(a: &Arc, b: &Arc, n_max: u64) -> Result<ProjectedInnerProduct> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let mut acc = CompensatedComplexSum::new();
    for n in 1..=n_max as i64 {
        acc.add(a.indicator_fourier(n) * b.indicator_fourier(n).conj());
    }
    Ok(ProjectedInnerProduct {
        value: acc.value(),
        tail_bound: 1.0 / (PI * PI * n_max as f64),
    })
}

/// `Σ_{n=1}^{n_max} c_n* c_n` with its tail bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedEnergy {
    pub energy: CMat,
    pub tail_bound: f64,
    /// Number of coefficients actually summed.
    pub terms: u64,
}

/// Energy `∫|P₊f|² dm = Σ_{n≥1} |f̂(n)|²` of a Hermitian-valued function.
///
/// For piecewise functions the tail bound is `(Σ_k ‖V_k − V_0‖)²/(π² n_max)`.
/// Sampled functions sum at most `G/2 − 1` coefficients; the reported tail
/// is the DFT energy between `n_max` and `G/2 − 1`.
pub fn pplus_energy(f: &MatrixCircleFunction, n_max: u64) -> Result<ProjectedEnergy> {
    f.check_hermitian()?;
    energy_unchecked(f, n_max, 1)
}

/// `Σ_{n≥1} |f̂(n)|²` for any matrix function, Hermitian or not.
pub fn analytic_energy(f: &MatrixCircleFunction, n_max: u64) -> Result<ProjectedEnergy> {
    energy_unchecked(f, n_max, 1)
}

/// `Σ_{n=1}^{n_max} c_{sign·n}* c_{sign·n}`; `sign = -1` gives the energy of
/// the conjugated function `f∘S`.
pub(crate) fn energy_unchecked(f: &MatrixCircleFunction, n_max: u64, sign: i64) -> Result<ProjectedEnergy> {
    let dim = f.dim();
    match &f.repr {
        Repr::Piecewise { partition, values } => {
            let mut acc = vec![CompensatedComplexSum::new(); dim * dim];
            let base = &values[0];
            let diffs: Vec<(&Arc, CMat)> = partition
                .arcs()
                .iter()
                .zip(values)
                .skip(1)
                .map(|(a, v)| (a, v - base))
                .collect();
            let mut c = matrix::zeros(dim);
            for n in 1..=n_max as i64 {
                c.fill(Complex64::new(0.0, 0.0));
                for (arc, d) in &diffs {
                    c += d * arc.indicator_fourier(sign * n);
                }
                accumulate_gram(&mut acc, &c, dim);
            }
            let spread: f64 = diffs.iter().map(|(_, d)| matrix::op_norm(d)).sum();
            Ok(ProjectedEnergy {
                energy: finish_gram(&acc, dim),
                tail_bound: spread * spread / (PI * PI * n_max as f64),
                terms: n_max,
            })
        }
        Repr::Sampled { samples } => {
            let g = samples.len();
            let limit = (g / 2 - 1) as u64;
            let terms = n_max.min(limit);
            let dft = sampled_dft(samples, dim);
            let coeff = |n: i64| &dft[(sign * n).rem_euclid(g as i64) as usize];
            let mut acc = vec![CompensatedComplexSum::new(); dim * dim];
            for n in 1..=terms as i64 {
                accumulate_gram(&mut acc, coeff(n), dim);
            }
            let mut tail = CompensatedSum::new();
            for n in (terms + 1)..=limit {
                tail.add(coeff(n as i64).norm_squared());
            }
            Ok(ProjectedEnergy {
                energy: finish_gram(&acc, dim),
                tail_bound: tail.value(),
                terms,
            })
        }
    }
}

fn accumulate_gram(acc: &mut [CompensatedComplexSum], c: &CMat, dim: usize) {
    for i in 0..dim {
        for j in 0..dim {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..dim {
                s += c[(k, i)].conj() * c[(k, j)];
            }
            acc[i * dim + j].add(s);
        }
    }
}

fn finish_gram(acc: &[CompensatedComplexSum], dim: usize) -> CMat {
    let m = CMat::from_fn(dim, dim, |i, j| acc[i * dim + j].value());
    matrix::hermitian_part(&m)
}
