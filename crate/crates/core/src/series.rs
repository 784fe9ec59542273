//! Compensated summation and the lattice series that appear in the
//! imaginary parts of projected indicator inner products.

use num_complex::Complex64;

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl CompensatedComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Partial sum of a positive series together with a bound on the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesEstimate {
    pub value: f64,
    pub tail_bound: f64,
}

/// `Σ_{k≥0} (2k+1)/((qk+1)²(qk+q-1)²)` for `q ∈ {3, 4}`, summed for
/// `k = 0..terms` with the tail bounded by `Σ_{k≥terms} 2/(q⁴k³) ≤ 1/(q⁴(terms-1)²)`.
///
/// `q = 3` gives the three-arc constant, `q = 4` the quadrant constant.
pub fn lattice_series(q: u32, terms: u64) -> SeriesEstimate {
    assert!(q == 3 || q == 4, "lattice series defined for q = 3 or 4");
    assert!(terms >= 2);
    let qf = q as f64;
    let mut acc = CompensatedSum::new();
    for k in 0..terms {
        let k = k as f64;
        let a = qf * k + 1.0;
        let b = qf * k + qf - 1.0;
        acc.add((2.0 * k + 1.0) / (a * a * b * b));
    }
    let km1 = (terms - 1) as f64;
    SeriesEstimate {
        value: acc.value(),
        tail_bound: 1.0 / (qf.powi(4) * km1 * km1),
    }
}
