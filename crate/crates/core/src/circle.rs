//! Angles, half-open arcs and finite arc partitions of the unit circle.
//!
//! Measures are normalized so the whole circle has measure one.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PARTITION_TOL: f64 = 1e-12;

/// A point `e^{iθ}` of the circle, stored as `θ ∈ [0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(into = "f64", from = "f64")]
pub struct Angle(f64);

impl Angle {
    pub fn new(theta: f64) -> Self {
        let mut t = theta.rem_euclid(TAU);
        if t >= TAU {
            t = 0.0;
        }
        Angle(t)
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn point(self) -> Complex64 {
        Complex64::from_polar(1.0, self.0)
    }

    pub fn conjugate(self) -> Angle {
        Angle::new(-self.0)
    }
}

impl From<f64> for Angle {
    fn from(t: f64) -> Self {
        Angle::new(t)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

/// Distance between two angles along the circle, in radians.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Half-open arc `[start, start + span)`, traversed counterclockwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    start: Angle,
    span: f64,
}

impl Arc {
    /// Arc from `start` to `end` (radians, counterclockwise). An interval whose
    /// length is a nonzero multiple of 2π is the full circle.
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !start.is_finite() || !end.is_finite() {
            return Err(Error::InvalidArc(format!("non-finite endpoint [{start}, {end})")));
        }
        let raw = end - start;
        let mut span = raw.rem_euclid(TAU);
        if span >= TAU {
            span = 0.0;
        }
        if span <= 1e-15 * TAU || TAU - span <= 1e-15 * TAU {
            if raw.abs() > PI {
                span = TAU;
            } else {
                return Err(Error::InvalidArc(format!("empty arc [{start}, {end})")));
            }
        }
        Ok(Arc {
            start: Angle::new(start),
            span,
        })
    }

    pub fn from_span(start: f64, span: f64) -> Result<Self> {
        if !(span > 0.0 && span <= TAU) {
            return Err(Error::InvalidArc(format!("span {span} outside (0, 2π]")));
        }
        Ok(Arc {
            start: Angle::new(start),
            span,
        })
    }

    pub fn full() -> Self {
        Arc {
            start: Angle(0.0),
            span: TAU,
        }
    }

    pub fn start(&self) -> f64 {
        self.start.radians()
    }

    /// End angle, possibly beyond 2π for wrapping arcs.
    pub fn end(&self) -> f64 {
        self.start.radians() + self.span
    }

    pub fn span(&self) -> f64 {
        self.span
    }

    pub fn midpoint(&self) -> f64 {
        self.start.radians() + 0.5 * self.span
    }

    /// Normalized measure in `(0, 1]`.
    pub fn measure(&self) -> f64 {
        self.span / TAU
    }

    pub fn contains(&self, theta: f64) -> bool {
        (theta - self.start.radians()).rem_euclid(TAU) < self.span
    }

    pub fn rotated(&self, beta: f64) -> Arc {
        Arc {
            start: Angle::new(self.start.radians() + beta),
            span: self.span,
        }
    }

    /// Image under `γ ↦ γ̄` (closed/open ends swap, a null-set difference).
    pub fn conjugated(&self) -> Arc {
        Arc {
            start: Angle::new(-self.end()),
            span: self.span,
        }
    }

    /// Fourier coefficient of the indicator with respect to normalized measure:
    /// `∫_arc γ^{-n} dm`.
    pub fn indicator_fourier(&self, n: i64) -> Complex64 {
        indicator_fourier(self, n)
    }
}

/// `∫_arc γ^{-n} dm`, evaluated as `e^{-in·mid} sin(n·span/2)/(πn)`, which equals
/// `(e^{-in·start} - e^{-in·end})/(2πin)`.
pub fn indicator_fourier(arc: &Arc, n: i64) -> Complex64 {
    if n == 0 {
        return Complex64::new(arc.measure(), 0.0);
    }
    if n < 0 {
        // Real-valued indicator: the coefficient at -n is the conjugate.
        return indicator_fourier(arc, -n).conj();
    }
    let nf = n as f64;
    let half = 0.5 * arc.span;
    // Reduce the phase before multiplying to keep large n accurate.
    let phase = -reduced_product(n, arc.start() + half);
    let amp = (nf * half).sin() / (PI * nf);
    Complex64::from_polar(amp, phase)
}

/// `n·x mod 2π` with the integer part split off first.
fn reduced_product(n: i64, x: f64) -> f64 {
    let xr = x.rem_euclid(TAU);
    (n as f64 * xr).rem_euclid(TAU)
}

/// Ordered list of pairwise disjoint arcs covering the circle.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcPartition {
    arcs: Vec<Arc>,
}

impl ArcPartition {
    pub fn new(arcs: Vec<Arc>) -> Result<Self> {
        if arcs.is_empty() {
            return Err(Error::InvalidPartition("no arcs".into()));
        }
        let total: f64 = arcs.iter().map(Arc::measure).sum();
        if (total - 1.0).abs() > PARTITION_TOL {
            return Err(Error::InvalidPartition(format!(
                "measures sum to {total}, expected 1"
            )));
        }
        let mut order: Vec<&Arc> = arcs.iter().collect();
        order.sort_by(|a, b| a.start().total_cmp(&b.start()));
        for (k, arc) in order.iter().enumerate() {
            let next = order[(k + 1) % order.len()];
            let gap = if order.len() == 1 {
                TAU
            } else {
                (next.start() - arc.start()).rem_euclid(TAU)
            };
            if arc.span() > gap + PARTITION_TOL * TAU {
                return Err(Error::InvalidPartition(format!(
                    "arc starting at {} overlaps its successor",
                    arc.start()
                )));
            }
        }
        Ok(ArcPartition { arcs })
    }

    /// `k` consecutive arcs of equal length starting at angle 0:
    /// `[2π(j-1)/k, 2πj/k)`.
    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidPartition("zero arcs".into()));
        }
        let span = TAU / k as f64;
        let arcs = (0..k)
            .map(|j| Arc::from_span(j as f64 * span, span))
            .collect::<Result<Vec<_>>>()?;
        ArcPartition::new(arcs)
    }

    /// Two-set partition `(Γ₀, Γ₁)` with `Γ₁ = [0, 2πθ)`.
    pub fn two_arc(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidPartition(format!("measure {theta} outside (0, 1)")));
        }
        ArcPartition::new(vec![
            Arc::from_span(TAU * theta, TAU * (1.0 - theta))?,
            Arc::from_span(0.0, TAU * theta)?,
        ])
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn measures(&self) -> Vec<f64> {
        self.arcs.iter().map(Arc::measure).collect()
    }

    /// Index of the arc containing `theta`.
    pub fn locate(&self, theta: f64) -> Option<usize> {
        self.arcs.iter().position(|a| a.contains(theta))
    }

    pub fn rotated(&self, beta: f64) -> ArcPartition {
        ArcPartition {
            arcs: self.arcs.iter().map(|a| a.rotated(beta)).collect(),
        }
    }

    pub fn conjugated(&self) -> ArcPartition {
        ArcPartition {
            arcs: self.arcs.iter().map(Arc::conjugated).collect(),
        }
    }

    /// All arc endpoints reduced to `[0, 2π)`.
    pub fn endpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .arcs
            .iter()
            .flat_map(|a| [a.start(), Angle::new(a.end()).radians()])
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        pts
    }
}

/// Sets that are finite unions of arcs, e.g. one side of a two-set partition.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcUnion {
    arcs: Vec<Arc>,
}

impl ArcUnion {
    pub fn new(arcs: Vec<Arc>) -> Result<Self> {
        if arcs.is_empty() {
            return Err(Error::InvalidArc("empty union".into()));
        }
        let u = ArcUnion { arcs };
        if u.measure() > 1.0 + PARTITION_TOL {
            return Err(Error::InvalidArc("arcs overlap".into()));
        }
        Ok(u)
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn measure(&self) -> f64 {
        self.arcs.iter().map(Arc::measure).sum()
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.arcs.iter().any(|a| a.contains(theta))
    }

    pub fn endpoints(&self) -> Vec<f64> {
        self.arcs
            .iter()
            .flat_map(|a| [a.start(), Angle::new(a.end()).radians()])
            .collect()
    }
}
