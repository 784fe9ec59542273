//! Inner functions fixing the origin.
//!
//! Besides powers and finite Blaschke products, a two-set partition
//! `𝕋 = Γ₀ ∪ Γ₁` yields an inner function `φ = τ∘ψ` where `ψ` is the
//! Herglotz integral of `1_{Γ₁}` (mapping the disc into the strip
//! `0 < Re w < 1`) and `τ` sends the strip to the disc with `τ(ψ(0)) = 0`.
//! Its boundary values carry `Γ₁` and `Γ₀` onto two complementary arcs.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::circle::{circular_distance, Angle, Arc, ArcUnion};
use crate::error::{Error, Result};

/// Default radius at which partition-derived maps are evaluated.
pub const DEFAULT_RHO: f64 = 1.0 - 1.0 / 4096.0;
/// Points closer than this to an arc endpoint are rejected.
pub const ENDPOINT_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum InnerMap {
    /// `z ↦ zⁿ`.
    Power(u32),
    /// `z ↦ rotation · z · Π (z − aᵢ)/(1 − āᵢ z)`.
    BlaschkeZero { zeros: Vec<Complex64>, rotation: Complex64 },
    PartitionDerived(PartitionMap),
}

/// `τ∘ψ` for a set `Γ₁`, with boundary values taken at radius `rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionMap {
    gamma1: ArcUnion,
    rho: f64,
    w0: Complex64,
}

impl PartitionMap {
    pub fn gamma1(&self) -> &ArcUnion {
        &self.gamma1
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `ψ(0) = m(Γ₁)`.
    pub fn w0(&self) -> Complex64 {
        self.w0
    }

    /// Complement of `Γ₁`, as arcs.
    pub fn gamma0(&self) -> Vec<Arc> {
        let mut pts: Vec<(f64, f64)> = self.gamma1.arcs().iter().map(|a| (a.start(), a.span())).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out = Vec::new();
        for (k, &(s, span)) in pts.iter().enumerate() {
            let next = pts[(k + 1) % pts.len()].0;
            let gap_start = s + span;
            let gap = (next - gap_start).rem_euclid(TAU);
            if gap > 1e-14 && gap < TAU - 1e-14 {
                if let Ok(a) = Arc::from_span(gap_start, gap) {
                    out.push(a);
                }
            }
        }
        out
    }

    /// `τ(ψ(z))` for `|z| < 1`.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        strip_to_disk(herglotz(&self.gamma1, z)?, self.w0)
    }
}

impl InnerMap {
    pub fn power(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("power must be at least 1".into()));
        }
        Ok(InnerMap::Power(n))
    }

    pub fn blaschke(zeros: Vec<Complex64>, rotation: Complex64) -> Result<Self> {
        if let Some(a) = zeros.iter().find(|a| !(a.norm() < 1.0)) {
            return Err(Error::InvalidParameter(format!("zero {a} not inside the disc")));
        }
        if (rotation.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("rotation {rotation} not unimodular")));
        }
        Ok(InnerMap::BlaschkeZero { zeros, rotation })
    }

    /// Multiplication by `e^{iβ}`.
    pub fn rotation(beta: f64) -> Self {
        InnerMap::BlaschkeZero {
            zeros: Vec::new(),
            rotation: Complex64::from_polar(1.0, beta),
        }
    }

    pub fn partition_derived(gamma1: ArcUnion, rho: f64) -> Result<Self> {
        let m = gamma1.measure();
        if !(m > 1e-12 && m < 1.0 - 1e-12) {
            return Err(Error::DegeneratePartition(m));
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::InvalidParameter(format!("radius {rho} outside (0, 1)")));
        }
        Ok(InnerMap::PartitionDerived(PartitionMap {
            gamma1,
            rho,
            w0: Complex64::new(m, 0.0),
        }))
    }

    /// Number of preimages of a boundary point, when finite and known.
    pub fn degree(&self) -> Option<usize> {
        match self {
            InnerMap::Power(n) => Some(*n as usize),
            InnerMap::BlaschkeZero { zeros, .. } => Some(zeros.len() + 1),
            InnerMap::PartitionDerived(_) => None,
        }
    }

    /// Value inside the disc.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if !(z.norm() < 1.0) {
            return Err(Error::OutOfDomain(format!("{z} is not inside the disc")));
        }
        Ok(match self {
            InnerMap::Power(n) => z.powu(*n),
            InnerMap::BlaschkeZero { zeros, rotation } => blaschke_value(zeros, *rotation, z),
            InnerMap::PartitionDerived(p) => p.eval(z)?,
        })
    }

    /// Boundary value `φ(e^{iθ})`. Partition-derived maps are evaluated at
    /// `ρe^{iθ}` and refuse arc endpoints.
    pub fn boundary_value(&self, theta: Angle) -> Result<Complex64> {
        let t = theta.radians();
        match self {
            InnerMap::Power(n) => Ok(Complex64::from_polar(1.0, (*n as f64 * t).rem_euclid(TAU))),
            InnerMap::BlaschkeZero { zeros, rotation } => {
                Ok(blaschke_value(zeros, *rotation, Complex64::from_polar(1.0, t)))
            }
            InnerMap::PartitionDerived(p) => {
                if p.gamma1.endpoints().iter().any(|&e| circular_distance(e, t) < ENDPOINT_MARGIN) {
                    return Err(Error::EndpointSingularity { theta: t });
                }
                p.eval(Complex64::from_polar(p.rho, t))
            }
        }
    }

    /// Continuous argument of the boundary values, increasing from `lift(0)`
    /// to `lift(0) + 2π·degree`. Only for the exact families.
    pub fn boundary_lift(&self, theta: f64) -> Option<f64> {
        match self {
            InnerMap::Power(n) => Some(*n as f64 * theta),
            InnerMap::BlaschkeZero { zeros, rotation } => {
                let mut g = rotation.arg() + theta;
                let e = Complex64::from_polar(1.0, theta);
                for a in zeros {
                    let one = Complex64::new(1.0, 0.0);
                    g += theta + (one - a * e.conj()).arg() - (one - a.conj() * e).arg();
                }
                Some(g)
            }
            InnerMap::PartitionDerived(_) => None,
        }
    }

    /// All `θ ∈ [0, 2π)` with `φ(e^{iθ}) = e^{it}`, ascending.
    pub fn preimages(&self, target: f64) -> Option<Vec<f64>> {
        let d = self.degree()?;
        if let InnerMap::Power(n) = self {
            let n = *n as f64;
            let base = target.rem_euclid(TAU) / n;
            return Some((0..d).map(|k| base + k as f64 * TAU / n).collect());
        }
        let g0 = self.boundary_lift(0.0)?;
        let mut out = Vec::with_capacity(d);
        let mut level = g0 + (target - g0).rem_euclid(TAU);
        for _ in 0..d {
            let (mut lo, mut hi) = (0.0, TAU);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if self.boundary_lift(mid)? < level {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
            level += TAU;
        }
        Some(out)
    }
}

fn blaschke_value(zeros: &[Complex64], rotation: Complex64, z: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    zeros
        .iter()
        .fold(rotation * z, |acc, a| acc * (z - a) / (one - a.conj() * z))
}

/// `ψ(z) = ∫ (γ+z)/(γ−z) 1_{Γ₁}(γ) dm(γ)`, summed over arcs in closed form:
/// for `[a, b]` the integral is `−(b−a)/2π + (1/πi)·log((e^{ib}−z)/(e^{ia}−z))`
/// along the branch on which `arg(γ − z)` grows by the arc's sweep.
pub fn herglotz(gamma1: &ArcUnion, z: Complex64) -> Result<Complex64> {
    let m = gamma1.measure();
    if !(m > 1e-12 && m < 1.0 - 1e-12) {
        return Err(Error::DegeneratePartition(m));
    }
    if !(z.norm() <= 1.0 - 1e-9) {
        return Err(Error::OutOfDomain(format!("|z| = {} exceeds 1 − 1e-9", z.norm())));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for arc in gamma1.arcs() {
        acc += herglotz_arc(arc, z);
    }
    Ok(acc)
}

fn herglotz_arc(arc: &Arc, z: Complex64) -> Complex64 {
    let ea = Complex64::from_polar(1.0, arc.start());
    let eb = Complex64::from_polar(1.0, arc.end());
    let ratio = (eb - z) / (ea - z);
    let sweep = if arc.span() >= TAU {
        TAU
    } else {
        let s = ratio.arg().rem_euclid(TAU);
        if s >= TAU { 0.0 } else { s }
    };
    let re = -arc.span() / TAU + sweep / PI;
    let im = -ratio.norm().ln() / PI;
    Complex64::new(re, im)
}

/// `u = e^{iπw}` followed by `(u − u₀)/(u − ū₀)` with `u₀ = e^{iπw₀}`.
pub fn strip_to_disk(w: Complex64, w0: Complex64) -> Result<Complex64> {
    for p in [w, w0] {
        if !(p.re > 0.0 && p.re < 1.0) || !p.im.is_finite() {
            return Err(Error::OutOfDomain(format!("{p} is not in the strip 0 < Re w < 1")));
        }
    }
    let i_pi = Complex64::new(0.0, PI);
    let u = (i_pi * w).exp();
    let u0 = (i_pi * w0).exp();
    Ok((u - u0) / (u - u0.conj()))
}

/// `(1/G) Σ_j φ(γ_j)ⁿ` for `n = 1..=n_max` on the grid offset by half a cell.
pub fn moments(map: &InnerMap, n_max: usize, grid: usize) -> Result<Vec<Complex64>> {
    if !grid.is_power_of_two() || grid < 2 {
        return Err(Error::InvalidGrid(grid));
    }
    let values = offset_boundary_samples(map, grid)?;
    let mut out = vec![Complex64::new(0.0, 0.0); n_max];
    for v in &values {
        let mut p = Complex64::new(1.0, 0.0);
        for o in out.iter_mut() {
            p *= v;
            *o += p;
        }
    }
    for o in &mut out {
        *o /= grid as f64;
    }
    Ok(out)
}

fn offset_boundary_samples(map: &InnerMap, grid: usize) -> Result<Vec<Complex64>> {
    (0..grid)
        .map(|j| map.boundary_value(Angle::new(TAU * (j as f64 + 0.5) / grid as f64)))
        .collect()
}

/// Shortest arc containing all given angles: the complement of the largest
/// gap between consecutive sorted angles.
pub fn minimal_covering_arc(angles: &[f64]) -> Option<Arc> {
    if angles.is_empty() {
        return None;
    }
    let mut a: Vec<f64> = angles.iter().map(|&t| Angle::new(t).radians()).collect();
    a.sort_by(f64::total_cmp);
    let mut best = (TAU - a[a.len() - 1] + a[0], a.len() - 1);
    for k in 0..a.len() - 1 {
        let gap = a[k + 1] - a[k];
        if gap > best.0 {
            best = (gap, k);
        }
    }
    let (gap, k) = best;
    let start = a[(k + 1) % a.len()];
    let span = TAU - gap;
    if span <= 0.0 {
        return Arc::from_span(start, 1e-15).ok();
    }
    Arc::from_span(start, span).ok()
}

/// Measure of the intersection of two arcs.
pub fn arc_overlap(a: &Arc, b: &Arc) -> f64 {
    let mut total = 0.0;
    for shift in [-TAU, 0.0, TAU] {
        let s = a.start().max(b.start() + shift);
        let e = a.end().min(b.end() + shift);
        if e > s {
            total += e - s;
        }
    }
    (total / TAU).min(a.measure().min(b.measure()))
}

/// Diagnostics for the arc images of a partition-derived map.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageArcReport {
    pub origin_value: f64,
    pub gamma1_measure: f64,
    pub gamma1_cover: Arc,
    pub gamma0_cover: Arc,
    pub overlap: f64,
    pub min_modulus: f64,
    pub slack: f64,
    pub pass: bool,
}

impl ImageArcReport {
    pub fn gamma1_cover_measure(&self) -> f64 {
        self.gamma1_cover.measure()
    }

    pub fn gamma0_cover_measure(&self) -> f64 {
        self.gamma0_cover.measure()
    }
}

/// Slack allowed between image covering arcs and the source measures.
pub const IMAGE_ARC_SLACK: f64 = 0.01;

/// Samples boundary values over `Γ₁` and `Γ₀` on the offset grid and checks
/// that each image lies in an arc of the matching measure.
pub fn image_arc_check(map: &InnerMap, grid: usize) -> Result<ImageArcReport> {
    let p = match map {
        InnerMap::PartitionDerived(p) => p,
        _ => {
            return Err(Error::InvalidParameter(
                "image arc check needs a partition-derived map".into(),
            ))
        }
    };
    if !grid.is_power_of_two() || grid < 2 {
        return Err(Error::InvalidGrid(grid));
    }
    let mut on1 = Vec::new();
    let mut on0 = Vec::new();
    let mut min_modulus = f64::INFINITY;
    for j in 0..grid {
        let t = TAU * (j as f64 + 0.5) / grid as f64;
        let v = map.boundary_value(Angle::new(t))?;
        min_modulus = min_modulus.min(v.norm());
        if p.gamma1.contains(t) {
            on1.push(v.arg());
        } else {
            on0.push(v.arg());
        }
    }
    let no_samples = || Error::InvalidGrid(grid);
    let gamma1_cover = minimal_covering_arc(&on1).ok_or_else(no_samples)?;
    let gamma0_cover = minimal_covering_arc(&on0).ok_or_else(no_samples)?;
    let m1 = p.gamma1.measure();
    let overlap = arc_overlap(&gamma1_cover, &gamma0_cover);
    let origin_value = p.eval(Complex64::new(0.0, 0.0))?.norm();
    let pass = origin_value <= 1e-9
        && gamma1_cover.measure() <= m1 + IMAGE_ARC_SLACK
        && gamma0_cover.measure() <= 1.0 - m1 + IMAGE_ARC_SLACK
        && overlap <= IMAGE_ARC_SLACK;
    Ok(ImageArcReport {
        origin_value,
        gamma1_measure: m1,
        gamma1_cover,
        gamma0_cover,
        overlap,
        min_modulus,
        slack: IMAGE_ARC_SLACK,
        pass,
    })
}
