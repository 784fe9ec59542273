//! Distorted Hilbert norms `‖x‖_A = ‖Ax‖` and the interpolation space at the
//! origin of a family `γ ↦ ℓ²_{A(γ)}`, which is `ℓ²_{F_W(0)}` for the weight
//! `W = A*A`.

use std::f64::consts::TAU;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::circle::{Angle, Arc, ArcPartition};
use crate::error::{Error, Result};
use crate::factorization::{self, factor_at_zero, FactorOptions};
use crate::fourier::{MatrixCircleFunction, SampledInterpolant};
use crate::inner::InnerMap;
use crate::matrix::{self, CMat};

pub type CVec = DVector<Complex64>;

/// Grid used when a rearranged function cannot stay piecewise.
pub const REARRANGE_GRID: usize = 1 << 12;

/// `ℂ^N` with the norm `x ↦ ‖Ax‖₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortedHilbert {
    a: CMat,
}

impl DistortedHilbert {
    pub fn new(a: CMat) -> Result<Self> {
        if !a.is_square() || a.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: a.nrows().max(1),
                found: a.ncols(),
            });
        }
        let s = matrix::min_singular_value(&a);
        if !(s > 1e-12) {
            return Err(Error::Singular { min_singular_value: s });
        }
        Ok(DistortedHilbert { a })
    }

    pub fn matrix(&self) -> &CMat {
        &self.a
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn norm(&self, x: &CVec) -> Result<f64> {
        norm_in(self, x)
    }

    /// Dual under the bilinear pairing: `ℓ²_{A^{-T}}`.
    pub fn dual(&self) -> Result<Self> {
        DistortedHilbert::new(matrix::inverse_transpose(&self.a)?)
    }

    /// Complex conjugate space `ℓ²_{Ā}`.
    pub fn conjugate(&self) -> Result<Self> {
        DistortedHilbert::new(matrix::conj(&self.a))
    }

    /// `ℓ²_{(A*)^{-1}}`.
    pub fn conj_dual(&self) -> Result<Self> {
        DistortedHilbert::new(matrix::inverse(&self.a.adjoint())?)
    }
}

pub fn norm_in(space: &DistortedHilbert, x: &CVec) -> Result<f64> {
    if x.len() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: x.len(),
        });
    }
    Ok((&space.a * x).norm())
}

pub fn dual_space(space: &DistortedHilbert) -> Result<DistortedHilbert> {
    space.dual()
}

pub fn conjugate_space(space: &DistortedHilbert) -> Result<DistortedHilbert> {
    space.conjugate()
}

pub fn conj_dual_space(space: &DistortedHilbert) -> Result<DistortedHilbert> {
    space.conj_dual()
}

/// `(x, y) = Σ xₙ yₙ`, without conjugation.
pub fn pairing(x: &CVec, y: &CVec) -> Result<Complex64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(x.iter().zip(y.iter()).map(|(a, b)| a * b).sum())
}

/// The space at the origin: `ℓ²_{F_W(0)}`.
pub fn interpolate_at_zero(w: &MatrixCircleFunction, opts: FactorOptions) -> Result<DistortedHilbert> {
    DistortedHilbert::new(factor_at_zero(w, opts)?.f0)
}

/// Relative disagreement tolerated between the two closed forms.
pub const TWO_VALUED_TOL: f64 = 1e-10;

/// `|F(0)|²` for the weight equal to `A₀` on a set of measure `1 − θ` and
/// `A₁` on a set of measure `θ`: `A₀^{1/2}(A₀^{-1/2}A₁A₀^{-1/2})^θA₀^{1/2}`.
/// The form pivoted on `A₁` is computed too and must agree.
pub fn two_valued_factor(a0: &CMat, a1: &CMat, theta: f64) -> Result<CMat> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidParameter(format!("theta {theta} outside [0, 1]")));
    }
    let first = geodesic(a0, a1, theta)?;
    let second = geodesic(a1, a0, 1.0 - theta)?;
    let gap = (&first - &second).norm() / first.norm().max(second.norm());
    if gap > TWO_VALUED_TOL {
        return Err(Error::ClosedFormMismatch { gap });
    }
    Ok(matrix::hermitian_part(&first))
}

fn geodesic(p: &CMat, q: &CMat, t: f64) -> Result<CMat> {
    let half = factorization::matrix_power_pos(p, 0.5)?;
    let inv_half = factorization::matrix_power_pos(p, -0.5)?;
    let inner = matrix::hermitian_part(&(&inv_half * q * &inv_half));
    let mid = factorization::matrix_power_pos(&inner, t)?;
    Ok(&half * mid * &half)
}

/// Piecewise weight `A₀` on `Γ₀` and `A₁` on `Γ₁ = ⋃ gamma1`.
pub fn two_valued_weight(a0: &CMat, a1: &CMat, gamma1: &[Arc]) -> Result<MatrixCircleFunction> {
    let mut arcs = Vec::new();
    let mut values = Vec::new();
    let mut sorted: Vec<Arc> = gamma1.to_vec();
    sorted.sort_by(|a, b| a.start().total_cmp(&b.start()));
    for (k, arc) in sorted.iter().enumerate() {
        arcs.push(*arc);
        values.push(a1.clone());
        let next = sorted[(k + 1) % sorted.len()].start();
        let gap = (next - arc.end()).rem_euclid(TAU);
        if gap > 1e-13 && TAU - gap > 1e-13 {
            arcs.push(Arc::from_span(arc.end(), gap)?);
            values.push(a0.clone());
        }
    }
    MatrixCircleFunction::piecewise(ArcPartition::new(arcs)?, values)
}

/// Measure-preserving reindexings of a function on the circle.
#[derive(Debug, Clone, PartialEq)]
pub enum RearrangementMap {
    /// `γ ↦ e^{iβ}γ`.
    Rotation(Angle),
    /// `γ ↦ γ̄`.
    Conjugation,
    /// Arc `k` receives the value of arc `perm[k]`.
    ArcPermutation(Vec<usize>),
    InnerComposition(InnerMap),
}

/// `W ∘ map`.
///
/// Rotations, conjugation and the exact inner maps keep piecewise input
/// piecewise (arc preimages are computed exactly); partition-derived maps
/// produce samples on a grid of [`REARRANGE_GRID`] points. Sampled input
/// stays on its grid, evaluated off-grid by trigonometric interpolation.
pub fn rearrange(w: &MatrixCircleFunction, map: &RearrangementMap) -> Result<MatrixCircleFunction> {
    match map {
        RearrangementMap::Rotation(beta) => rotate(w, beta.radians()),
        RearrangementMap::Conjugation => Ok(w.conjugated()),
        RearrangementMap::ArcPermutation(perm) => permute(w, perm),
        RearrangementMap::InnerComposition(phi) => compose_inner(w, phi),
    }
}

fn rotate(w: &MatrixCircleFunction, beta: f64) -> Result<MatrixCircleFunction> {
    match w.partition() {
        Some(p) => MatrixCircleFunction::piecewise(p.rotated(-beta), w.values().to_vec()),
        None => {
            let g = w.grid_size().expect("sampled");
            let shift = beta * g as f64 / TAU;
            if (shift - shift.round()).abs() < 1e-9 {
                let s = (shift.round() as i64).rem_euclid(g as i64) as usize;
                let v = w.values();
                MatrixCircleFunction::sampled((0..g).map(|j| v[(j + s) % g].clone()).collect())
            } else {
                let interp = SampledInterpolant::new(w)?;
                MatrixCircleFunction::sample_fn(g, |t| interp.eval(t + beta))
            }
        }
    }
}

fn permute(w: &MatrixCircleFunction, perm: &[usize]) -> Result<MatrixCircleFunction> {
    let p = w.partition().ok_or_else(|| {
        Error::IncompatibleRepresentation("arc permutation needs a piecewise function".into())
    })?;
    let n = p.len();
    let mut seen = vec![false; n];
    if perm.len() != n || perm.iter().any(|&k| k >= n || std::mem::replace(&mut seen[k], true)) {
        return Err(Error::InvalidParameter(format!("{perm:?} is not a permutation of {n} arcs")));
    }
    let m = p.measures();
    for (k, &src) in perm.iter().enumerate() {
        if (m[k] - m[src]).abs() > 1e-12 {
            return Err(Error::IncompatibleRepresentation(format!(
                "arcs {k} and {src} have different measures"
            )));
        }
    }
    let values = perm.iter().map(|&src| w.values()[src].clone()).collect();
    MatrixCircleFunction::piecewise(p.clone(), values)
}

fn compose_inner(w: &MatrixCircleFunction, phi: &InnerMap) -> Result<MatrixCircleFunction> {
    match (w.partition(), phi.degree()) {
        (Some(p), Some(_)) => compose_piecewise_exact(w, p, phi),
        (Some(_), None) => {
            MatrixCircleFunction::sample_fn(REARRANGE_GRID, |t| w.value_at(boundary_angle(phi, t)))
        }
        (None, _) => {
            let g = w.grid_size().expect("sampled");
            if let InnerMap::Power(n) = phi {
                let v = w.values();
                return MatrixCircleFunction::sampled((0..g).map(|j| v[(j * *n as usize) % g].clone()).collect());
            }
            let interp = SampledInterpolant::new(w)?;
            MatrixCircleFunction::sample_fn(g, |t| interp.eval(boundary_angle(phi, t)))
        }
    }
}

/// Argument of `φ(e^{iθ})`, nudging off arc endpoints of partition-derived maps.
fn boundary_angle(phi: &InnerMap, theta: f64) -> f64 {
    match phi.boundary_value(Angle::new(theta)) {
        Ok(v) => v.arg(),
        Err(_) => phi
            .boundary_value(Angle::new(theta + 1e-9))
            .map(|v| v.arg())
            .unwrap_or(theta),
    }
}

fn compose_piecewise_exact(w: &MatrixCircleFunction, p: &ArcPartition, phi: &InnerMap) -> Result<MatrixCircleFunction> {
    let mut cuts: Vec<f64> = Vec::new();
    for e in p.endpoints() {
        cuts.extend(phi.preimages(e).expect("exact map"));
    }
    if cuts.is_empty() {
        return Ok(w.clone());
    }
    cuts.iter_mut().for_each(|c| *c = Angle::new(*c).radians());
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    let mut arcs = Vec::with_capacity(cuts.len());
    let mut values = Vec::with_capacity(cuts.len());
    for (k, &s) in cuts.iter().enumerate() {
        let e = if k + 1 < cuts.len() { cuts[k + 1] } else { cuts[0] + TAU };
        let arc = Arc::from_span(s, e - s)?;
        let image = phi.boundary_value(Angle::new(arc.midpoint()))?.arg();
        arcs.push(arc);
        values.push(w.value_at(image));
    }
    MatrixCircleFunction::piecewise(ArcPartition::new(arcs)?, values)
}

/// `‖F_W(0) F_{W₂}(0)^{-1}‖`, the norm of the identity from the space at the
/// origin of `W₂` to that of `W`.
pub fn distortion_norm(w: &MatrixCircleFunction, w2: &MatrixCircleFunction, opts: FactorOptions) -> Result<f64> {
    if w.dim() != w2.dim() {
        return Err(Error::DimensionMismatch {
            expected: w.dim(),
            found: w2.dim(),
        });
    }
    let f = factor_at_zero(w, opts)?.f0;
    let f2 = factor_at_zero(w2, opts)?.f0;
    distortion_from_factors(&f, &f2)
}

pub fn distortion_from_factors(f: &CMat, f2: &CMat) -> Result<f64> {
    Ok(matrix::op_norm(&(f * matrix::inverse(f2)?)))
}
