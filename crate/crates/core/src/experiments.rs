//! Reproducible experiments with machine-readable reports.
//!
//! Every numeric claim in a [`Report`] is a [`Check`] carrying its value,
//! tolerance, provenance and verdict. Random batteries are drawn from a
//! ChaCha stream seeded by [`ExperimentConfig::seed`].

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::circle::{Angle, Arc, ArcPartition, ArcUnion};
use crate::error::{Error, Result};
use crate::factorization::{self, factor_at_zero, FactorOptions, FactorizationResult};
use crate::fourier::{self, MatrixCircleFunction};
use crate::inner::{self, InnerMap, DEFAULT_RHO};
use crate::interp::{self, distortion_from_factors, rearrange, RearrangementMap};
use crate::matrix::{self, c64, CMat};
use crate::series;

/// Inputs shared by all experiments. Every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Dimension of random weights.
    pub dim: usize,
    /// Truncation `M` for piecewise weights; sampled weights use at most `G/2 − 1`.
    pub truncation: usize,
    /// Richardson-extrapolate piecewise factorizations from `M` and `M/2`.
    pub extrapolate: bool,
    /// Grid size for sampled weights.
    pub grid: usize,
    pub n_max: u64,
    /// Terms of the lattice series oracle.
    pub series_terms: u64,
    pub seed: u64,
    pub r_values: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub quadrant_epsilon: f64,
    /// `α = e^{iπj/steps}` for `j = 0..steps`.
    pub alpha_steps: usize,
    pub thetas: Vec<f64>,
    pub pairs: usize,
    pub random_weights: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dim: 2,
            truncation: 4096,
            extrapolate: true,
            grid: 1 << 12,
            n_max: 1_000_000,
            series_terms: 1_000_000,
            seed: 7,
            r_values: vec![0.0, 0.5, 1.0, 2.0],
            epsilons: vec![0.2, 0.1, 0.05, 0.025],
            quadrant_epsilon: 0.1,
            alpha_steps: 8,
            thetas: vec![0.25, 0.5, 0.7],
            pairs: 20,
            random_weights: 3,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.dim == 0 || self.truncation < 2 || self.n_max == 0 || self.series_terms < 2 {
            return bad("dim, truncation, n_max and series_terms must be positive".into());
        }
        if !self.grid.is_power_of_two() || self.grid < 4 {
            return Err(Error::InvalidGrid(self.grid));
        }
        if self.epsilons.iter().chain([&self.quadrant_epsilon]).any(|e| !(0.0..1.0).contains(e)) {
            return bad("epsilon values must lie in [0, 1)".into());
        }
        if self.thetas.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return bad("theta values must lie in [0, 1]".into());
        }
        if self.r_values.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return bad("r values must be finite and nonnegative".into());
        }
        Ok(())
    }

    /// Factorization options suited to `w`.
    pub fn options_for(&self, w: &MatrixCircleFunction) -> FactorOptions {
        match w.grid_size() {
            None => FactorOptions {
                truncation: self.truncation,
                extrapolate: self.extrapolate,
                ..FactorOptions::default()
            },
            Some(_) => FactorOptions::with_truncation(self.truncation).clamped_for(w),
        }
    }

    fn factor(&self, w: &MatrixCircleFunction) -> Result<FactorizationResult> {
        factor_at_zero(w, self.options_for(w))
    }
}

/// Where an expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// A formula or constant stated in the source analysis.
    Reference,
    /// Computed by an independent oracle.
    Derived,
    Trivial,
    /// A numerical margin chosen by the implementation.
    Margin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Relation {
    /// `|value − expected| ≤ tolerance`.
    Near { expected: f64 },
    /// `value ≤ tolerance`.
    AtMost,
    /// `value ≥ tolerance`.
    AtLeast,
    /// `lower ≤ value ≤ tolerance`.
    Between { lower: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub metric: String,
    pub param_name: String,
    pub param_value: String,
    pub value: f64,
    pub relation: Relation,
    pub tolerance: f64,
    pub provenance: Provenance,
    pub pass: bool,
}

impl Check {
    fn build(metric: &str, value: f64, relation: Relation, tolerance: f64) -> Self {
        let pass = match relation {
            Relation::Near { expected } => (value - expected).abs() <= tolerance,
            Relation::AtMost => value <= tolerance,
            Relation::AtLeast => value >= tolerance,
            Relation::Between { lower } => lower <= value && value <= tolerance,
        };
        Check {
            metric: metric.to_string(),
            param_name: String::new(),
            param_value: String::new(),
            value,
            relation,
            tolerance,
            provenance: Provenance::Derived,
            pass,
        }
    }

    pub fn near(metric: &str, value: f64, expected: f64, tolerance: f64) -> Self {
        Self::build(metric, value, Relation::Near { expected }, tolerance)
    }

    pub fn at_most(metric: &str, value: f64, bound: f64) -> Self {
        Self::build(metric, value, Relation::AtMost, bound)
    }

    pub fn at_least(metric: &str, value: f64, bound: f64) -> Self {
        Self::build(metric, value, Relation::AtLeast, bound)
    }

    pub fn between(metric: &str, value: f64, lower: f64, upper: f64) -> Self {
        Self::build(metric, value, Relation::Between { lower }, upper)
    }

    pub fn param(mut self, name: &str, value: impl ToString) -> Self {
        self.param_name = name.to_string();
        self.param_value = value.to_string();
        self
    }

    pub fn provenance(mut self, p: Provenance) -> Self {
        self.provenance = p;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    /// Headline values; matrices are rows of `[re, im]` pairs.
    pub values: BTreeMap<String, Value>,
    /// Constancy residuals, tail bounds and similar.
    pub diagnostics: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(experiment: &str, config: &ExperimentConfig) -> Self {
        Report {
            experiment: experiment.to_string(),
            seed: config.seed,
            config: config.clone(),
            values: BTreeMap::new(),
            diagnostics: BTreeMap::new(),
            checks: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    fn value(&mut self, key: impl Into<String>, v: Value) {
        self.values.insert(key.into(), v);
    }

    fn diag(&mut self, key: impl Into<String>, v: f64) {
        self.diagnostics.insert(key.into(), v);
    }

    fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    fn factor_diagnostics(&mut self, key: &str, r: &FactorizationResult) {
        self.diag(format!("{key}.constancy_residual"), r.constancy_residual);
        self.diag(format!("{key}.constancy_rms"), r.constancy_rms);
        self.diag(format!("{key}.contraction"), r.contraction);
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("experiment,param_name,param_value,metric,value,tolerance,pass\n");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{},{},{},{},{:e},{:e},{}",
                csv_field(&self.experiment),
                csv_field(&c.param_name),
                csv_field(&c.param_value),
                csv_field(&c.metric),
                c.value,
                c.tolerance,
                c.pass
            );
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        }
    }
}

/// Writes `<out_dir>/<experiment>.<ext>` and returns its path.
pub fn emit_report(report: &Report, format: ReportFormat, out_dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join(format!("{}.{}", report.experiment, format.extension()));
    let body = match format {
        ReportFormat::Json => report.to_json()?,
        ReportFormat::Csv => report.to_csv(),
    };
    fs::write(&path, body)?;
    Ok(path)
}

/// A matrix as rows of `[re, im]` pairs.
pub fn matrix_json(m: &CMat) -> Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    json!(rows)
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn fmt_param(x: f64) -> String {
    format!("{x}")
}

// ---------------------------------------------------------------------------
// Weight constructions

/// `[[0, f̄], [f, 0]]` for a complex scalar `f`.
pub fn hermitian_embedding(f: Complex64) -> CMat {
    CMat::from_row_slice(2, 2, &[c64(0.0, 0.0), f.conj(), f, c64(0.0, 0.0)])
}

/// `Δ` built from `f = i·1_{T₁} + 1_{T₂}` on the three equal arcs, and its
/// rearrangement `Δ′` with the values on `T₂` and `T₃` exchanged.
pub fn three_arc_deltas() -> Result<(MatrixCircleFunction, MatrixCircleFunction)> {
    let values = vec![
        hermitian_embedding(c64(0.0, 1.0)),
        hermitian_embedding(c64(1.0, 0.0)),
        hermitian_embedding(c64(0.0, 0.0)),
    ];
    let delta = MatrixCircleFunction::piecewise(ArcPartition::uniform(3)?, values)?;
    let swapped = rearrange(&delta, &RearrangementMap::ArcPermutation(vec![0, 2, 1]))?;
    Ok((delta, swapped))
}

/// `I + εΔ`.
pub fn perturbed_identity(delta: &MatrixCircleFunction, eps: f64) -> Result<MatrixCircleFunction> {
    let n = delta.dim();
    delta.map_values(|d| Ok(matrix::identity(n) + d * c64(eps, 0.0)))
}

/// `h_α = α1_{Q₁} − ᾱ1_{Q₂} − α1_{Q₃} + ᾱ1_{Q₄}` as a 1×1 function.
pub fn quadrant_h(alpha: Complex64) -> Result<MatrixCircleFunction> {
    let vals = [alpha, -alpha.conj(), -alpha, alpha.conj()];
    MatrixCircleFunction::piecewise(
        ArcPartition::uniform(4)?,
        vals.iter().map(|v| CMat::from_element(1, 1, *v)).collect(),
    )
}

/// The four quadrant values `I+εδ_α`, `(I+εδ̄_α)^{-1}`, `(I+εδ_α)^{-1}`,
/// `I+εδ̄_α` with `δ_α = [[0, ᾱ], [α, 0]]`.
pub fn quadrant_pieces(alpha: Complex64, eps: f64) -> Result<[CMat; 4]> {
    let id = matrix::identity(2);
    let d = hermitian_embedding(alpha) * c64(eps, 0.0);
    let dbar = matrix::conj(&d);
    let v1 = &id + &d;
    let v4 = &id + &dbar;
    let v2 = matrix::hermitian_part(&matrix::inverse(&v4)?);
    let v3 = matrix::hermitian_part(&matrix::inverse(&v1)?);
    Ok([v1, v2, v3, v4])
}

/// `W^{α,ε}`, pieces in quadrant order.
pub fn quadrant_weight(alpha: Complex64, eps: f64) -> Result<MatrixCircleFunction> {
    let v = quadrant_pieces(alpha, eps)?;
    MatrixCircleFunction::piecewise(ArcPartition::uniform(4)?, v.to_vec())
}

/// The arrangement with `Q₃ ↔ Q₄` exchanged, which satisfies `W(γ̄)W(γ) = I`.
pub fn quadrant_weight_symmetric(alpha: Complex64, eps: f64) -> Result<MatrixCircleFunction> {
    let [v1, v2, v3, v4] = quadrant_pieces(alpha, eps)?;
    MatrixCircleFunction::piecewise(ArcPartition::uniform(4)?, vec![v1, v2, v4, v3])
}

/// `max ‖W(γ̄)W(γ) − I‖` over the pieces or samples.
pub fn self_dual_defect(w: &MatrixCircleFunction) -> f64 {
    let n = w.dim();
    let probe: Vec<f64> = match w.partition() {
        Some(p) => p.arcs().iter().map(Arc::midpoint).collect(),
        None => (0..w.grid_size().unwrap_or(0)).map(|j| fourier::grid_angle(j, w.grid_size().unwrap())).collect(),
    };
    probe
        .iter()
        .map(|&t| (w.value_at(-t) * w.value_at(t) - matrix::identity(n)).norm())
        .fold(0.0, f64::max)
}

/// Hermitian positive definite `B*B + I/2` with entries of `B` uniform in
/// the unit square around 0.
pub fn random_pd(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    let b = CMat::from_fn(n, n, |_, _| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    matrix::hermitian_part(&(b.adjoint() * &b + matrix::identity(n) * c64(0.5, 0.0)))
}

/// Pair of positive definite matrices with commutator norm above 1e-2.
pub fn random_noncommuting_pair(rng: &mut ChaCha8Rng, n: usize) -> (CMat, CMat) {
    loop {
        let a = random_pd(rng, n);
        let b = random_pd(rng, n);
        if n == 1 || (&a * &b - &b * &a).norm() > 1e-2 {
            return (a, b);
        }
    }
}

/// Piecewise weight with `3..=5` random arcs and random positive values.
pub fn random_piecewise_weight(rng: &mut ChaCha8Rng, n: usize) -> Result<MatrixCircleFunction> {
    let k = rng.gen_range(3..=5);
    let mut cuts: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..TAU)).collect();
    cuts.sort_by(f64::total_cmp);
    let arcs = (0..k)
        .map(|j| {
            let s = cuts[j];
            let e = if j + 1 < k { cuts[j + 1] } else { cuts[0] + TAU };
            Arc::from_span(s, e - s)
        })
        .collect::<Result<Vec<_>>>()?;
    let values = (0..k).map(|_| random_pd(rng, n)).collect();
    MatrixCircleFunction::piecewise(ArcPartition::new(arcs)?, values)
}

// ---------------------------------------------------------------------------
// Experiments

/// Distortion between `W^{(r)}` and `W^{(r)}∘S` against `√(1+r²)`.
pub fn run_conjugation_sweep(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    if cfg.r_values.is_empty() {
        return Err(Error::InvalidParameter("r list is empty".into()));
    }
    let mut rep = Report::new("conjugation-sweep", cfg);
    let mut rs = cfg.r_values.clone();
    rs.sort_by(f64::total_cmp);
    for r in rs {
        let p = fmt_param(r);
        let w = factorization::coupled_weight_sampled(r, cfg.grid)?;
        let ws = rearrange(&w, &RearrangementMap::Conjugation)?;
        let f = cfg.factor(&w)?;
        let fs = cfg.factor(&ws)?;
        let dist = distortion_from_factors(&f.f0, &fs.f0)?;
        let expected = (1.0 + r * r).sqrt();
        rep.check(
            Check::near("distortion", dist, expected, 1e-6)
                .param("r", &p)
                .provenance(if r == 0.0 { Provenance::Trivial } else { Provenance::Reference }),
        );
        let m0_err = (&f.m0 - factorization::coupled_weight_m0(r)).norm();
        rep.check(Check::at_most("m0_error", m0_err, 1e-6).param("r", &p).provenance(Provenance::Reference));
        rep.value(format!("m0[r={p}]"), matrix_json(&f.m0));
        rep.value(format!("distortion[r={p}]"), json!(dist));
        rep.factor_diagnostics(&format!("r={p}"), &f);
        rep.factor_diagnostics(&format!("r={p}.conjugated"), &fs);
    }
    Ok(rep)
}

/// `(9√3/(8π²))·S₃`.
pub fn three_arc_constant(terms: u64) -> series::SeriesEstimate {
    let s = series::lattice_series(3, terms);
    let c = 9.0 * 3f64.sqrt() / (8.0 * PI * PI);
    series::SeriesEstimate {
        value: c * s.value,
        tail_bound: c * s.tail_bound,
    }
}

/// `(4/π²)·S₄`.
pub fn quadrant_constant(terms: u64) -> series::SeriesEstimate {
    let s = series::lattice_series(4, terms);
    let c = 4.0 / (PI * PI);
    series::SeriesEstimate {
        value: c * s.value,
        tail_bound: c * s.tail_bound,
    }
}

/// Energy difference and factorization distortion for the three-arc family.
pub fn run_three_arc(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let mut rep = Report::new("three-arc", cfg);
    let (delta, delta2) = three_arc_deltas()?;
    let arcs = ArcPartition::uniform(3)?;
    let (t1, t2, t3) = (arcs.arcs()[0], arcs.arcs()[1], arcs.arcs()[2]);

    let ip12 = fourier::pplus_inner_product(&t1, &t2, cfg.n_max)?;
    let ip13 = fourier::pplus_inner_product(&t1, &t3, cfg.n_max)?;
    let analytic = three_arc_constant(cfg.series_terms);
    rep.value("inner_product_t1_t2", complex_json(ip12.value));
    rep.value("inner_product_t1_t3", complex_json(ip13.value));
    rep.value("series_constant", json!(analytic.value));
    rep.diag("inner_product.tail_bound", ip12.tail_bound);
    rep.diag("series.tail_bound", analytic.tail_bound);
    rep.check(Check::near("im_inner_product_t1_t2", ip12.value.im, analytic.value, 1e-8).provenance(Provenance::Reference));
    rep.check(
        Check::at_most("rotation_identity_gap", (ip13.value - ip12.value.conj()).norm(), 1e-10)
            .provenance(Provenance::Reference),
    );

    let e = fourier::pplus_energy(&delta, cfg.n_max)?;
    let e2 = fourier::pplus_energy(&delta2, cfg.n_max)?;
    let d = &e.energy - &e2.energy;
    let d_norm = matrix::op_norm(&d);
    rep.value("energy", matrix_json(&e.energy));
    rep.value("energy_rearranged", matrix_json(&e2.energy));
    rep.value("energy_difference", matrix_json(&d));
    rep.diag("energy.tail_bound", e.tail_bound);
    rep.check(Check::at_least("energy_difference_norm", d_norm, 1e-3).provenance(Provenance::Reference));
    let d_expected = matrix::from_real_diagonal(&[-4.0 * analytic.value, 4.0 * analytic.value]);
    rep.check(Check::at_most("energy_difference_vs_series", (&d - d_expected).norm(), 1e-8));

    let mut errors: Vec<(f64, f64)> = Vec::new();
    let mut eps_list = cfg.epsilons.clone();
    eps_list.sort_by(|a, b| b.total_cmp(a));
    for eps in eps_list {
        let p = fmt_param(eps);
        let w = perturbed_identity(&delta, eps)?;
        let w2 = perturbed_identity(&delta2, eps)?;
        let f = cfg.factor(&w)?;
        let f2 = cfg.factor(&w2)?;
        let dist = distortion_from_factors(&f.f0, &f2.f0)?;
        rep.value(format!("m0[eps={p}]"), matrix_json(&f.m0));
        rep.value(format!("m0_rearranged[eps={p}]"), matrix_json(&f2.m0));
        rep.value(format!("distortion[eps={p}]"), json!(dist));
        rep.factor_diagnostics(&format!("eps={p}"), &f);
        rep.factor_diagnostics(&format!("eps={p}.rearranged"), &f2);
        if eps == 0.0 {
            let dev = (&f.m0 - matrix::identity(2)).norm().max((&f2.m0 - matrix::identity(2)).norm());
            rep.check(Check::at_most("m0_identity_gap", dev, 1e-12).param("eps", &p).provenance(Provenance::Trivial));
            continue;
        }
        let margin = 1.0 + 0.5 * eps * eps * d_norm;
        rep.check(Check::at_least("distortion", dist, margin).param("eps", &p).provenance(Provenance::Margin));
        let approx = factorization::second_order_approx(&delta, eps, cfg.n_max)?;
        let err = matrix::op_norm(&(&f.m0 - approx));
        rep.value(format!("second_order_error[eps={p}]"), json!(err));
        errors.push((eps, err));
    }
    for pair in errors.windows(2) {
        let ((e1, r1), (e2, r2)) = (pair[0], pair[1]);
        if (e1 - 2.0 * e2).abs() < 1e-12 * e1 {
            rep.check(Check::between("second_order_halving_ratio", r1 / r2, 6.0, 10.0).param("eps", fmt_param(e1)));
        }
    }
    Ok(rep)
}

/// The quadrant series, non-constancy of `α ↦ ‖P₊h_α‖²`, and the two
/// arrangements of `W^{α,ε}`.
pub fn run_quadrant(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    if cfg.alpha_steps == 0 {
        return Err(Error::InvalidParameter("alpha_steps must be positive".into()));
    }
    let mut rep = Report::new("quadrant", cfg);
    let q = ArcPartition::uniform(4)?;
    let ip = fourier::pplus_inner_product(&q.arcs()[0], &q.arcs()[1], cfg.n_max)?;
    let analytic = quadrant_constant(cfg.series_terms);
    rep.value("inner_product_q1_q2", complex_json(ip.value));
    rep.value("series_constant", json!(analytic.value));
    rep.diag("inner_product.tail_bound", ip.tail_bound);
    rep.diag("series.tail_bound", analytic.tail_bound);
    rep.check(Check::near("im_inner_product_q1_q2", ip.value.im, analytic.value, 1e-10).provenance(Provenance::Reference));

    let alphas: Vec<(String, Complex64)> = (0..cfg.alpha_steps)
        .map(|j| {
            let t = PI * j as f64 / cfg.alpha_steps as f64;
            (format!("{j}/{}", cfg.alpha_steps), Complex64::from_polar(1.0, t))
        })
        .collect();
    let mut energies = Vec::new();
    for (label, alpha) in &alphas {
        let e = fourier::analytic_energy(&quadrant_h(*alpha)?, cfg.n_max)?;
        let v = e.energy[(0, 0)].re;
        rep.value(format!("h_energy[alpha=e^(i*pi*{label})]"), json!(v));
        energies.push(v);
    }
    let spread = energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - energies.iter().cloned().fold(f64::INFINITY, f64::min);
    rep.value("h_energy_spread", json!(spread));
    rep.check(Check::at_least("h_energy_spread", spread, 1e-3).provenance(Provenance::Reference));

    let eps = cfg.quadrant_epsilon;
    let mut worst_dev: f64 = 0.0;
    let mut worst_sym: f64 = 0.0;
    for (label, alpha) in &alphas {
        let w = quadrant_weight(*alpha, eps)?;
        let ws = quadrant_weight_symmetric(*alpha, eps)?;
        let f = cfg.factor(&w)?;
        let fs = cfg.factor(&ws)?;
        let dev = matrix::op_norm(&(&f.m0 - matrix::identity(2)));
        let sym = matrix::op_norm(&(&fs.m0 - matrix::identity(2)));
        rep.value(format!("m0[alpha=e^(i*pi*{label})]"), matrix_json(&f.m0));
        rep.value(format!("m0_symmetric[alpha=e^(i*pi*{label})]"), matrix_json(&fs.m0));
        rep.diag(format!("alpha={label}.self_dual_defect"), self_dual_defect(&ws));
        rep.factor_diagnostics(&format!("alpha={label}"), &f);
        rep.factor_diagnostics(&format!("alpha={label}.symmetric"), &fs);
        rep.check(
            Check::at_most("symmetric_m0_identity_gap", sym, 1e-6)
                .param("alpha", label)
                .provenance(if eps == 0.0 { Provenance::Trivial } else { Provenance::Reference }),
        );
        worst_dev = worst_dev.max(dev);
        worst_sym = worst_sym.max(sym);
    }
    rep.value("max_m0_deviation", json!(worst_dev));
    if eps > 0.0 {
        rep.check(
            Check::at_least("max_m0_deviation", worst_dev, 0.5 * eps * eps * spread)
                .param("eps", fmt_param(eps))
                .provenance(Provenance::Margin),
        );
    }
    Ok(rep)
}

fn inner_map_battery() -> Result<Vec<(String, InnerMap)>> {
    Ok(vec![
        ("z^2".into(), InnerMap::power(2)?),
        ("z^3".into(), InnerMap::power(3)?),
        ("blaschke(0.5)".into(), InnerMap::blaschke(vec![c64(0.5, 0.0)], c64(1.0, 0.0))?),
        (
            "blaschke(0.4+0.2i)".into(),
            InnerMap::blaschke(vec![c64(0.4, 0.2)], Complex64::from_polar(1.0, PI / 7.0))?,
        ),
    ])
}

/// The partition-derived map for `Γ₁ = [0, π/2) ∪ [π, 3π/2)`.
pub fn quarter_pair_map() -> Result<InnerMap> {
    let g = ArcUnion::new(vec![Arc::new(0.0, FRAC_PI_2)?, Arc::new(PI, 1.5 * PI)?])?;
    InnerMap::partition_derived(g, DEFAULT_RHO)
}

/// Invariance of energies and `|F(0)|²` under composition with inner
/// functions, and its failure for conjugation.
pub fn run_inner_invariance(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let mut rep = Report::new("inner-invariance", cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (delta, _) = three_arc_deltas()?;
    let mut battery: Vec<(String, MatrixCircleFunction)> = vec![
        ("coupled(r=1)".into(), factorization::coupled_weight_sampled(1.0, cfg.grid)?),
        ("three-arc(eps=0.1)".into(), perturbed_identity(&delta, 0.1)?),
    ];
    for k in 0..cfg.random_weights {
        battery.push((format!("random#{k}"), random_piecewise_weight(&mut rng, cfg.dim)?));
    }
    let maps = inner_map_battery()?;
    let partition = quarter_pair_map()?;

    for (wname, w) in &battery {
        let e = fourier::pplus_energy(w, cfg.n_max)?;
        let f = cfg.factor(w)?;
        rep.factor_diagnostics(wname, &f);
        for (mname, phi) in &maps {
            let param = format!("{wname}∘{mname}");
            let wc = rearrange(w, &RearrangementMap::InnerComposition(phi.clone()))?;
            let ec = fourier::pplus_energy(&wc, cfg.n_max)?;
            let fc = cfg.factor(&wc)?;
            rep.check(Check::at_most("energy_gap", (&ec.energy - &e.energy).norm(), 1e-6).param("pair", &param));
            rep.check(Check::at_most("m0_gap", (&fc.m0 - &f.m0).norm(), 1e-5).param("pair", &param).provenance(Provenance::Reference));
            let dist = distortion_from_factors(&f.f0, &fc.f0)?;
            rep.check(Check::near("distortion", dist, 1.0, 1e-5).param("pair", &param));
            rep.factor_diagnostics(&param, &fc);
        }
        let param = format!("{wname}∘partition");
        let wc = rearrange(w, &RearrangementMap::InnerComposition(partition.clone()))?;
        let ec = fourier::pplus_energy(&wc, cfg.n_max)?;
        rep.check(Check::at_most("energy_gap", (&ec.energy - &e.energy).norm(), 1e-3).param("pair", &param));
        let fc = cfg.factor(&wc)?;
        rep.value(format!("m0_gap[{param}]"), json!((&fc.m0 - &f.m0).norm()));
        rep.factor_diagnostics(&param, &fc);

        let wr = rearrange(w, &RearrangementMap::Rotation(Angle::new(0.7)))?;
        let fr = cfg.factor(&wr)?;
        let dist = distortion_from_factors(&f.f0, &fr.f0)?;
        rep.check(
            Check::near("distortion", dist, 1.0, 1e-9)
                .param("pair", format!("{wname}∘rotation(0.7)"))
                .provenance(Provenance::Trivial),
        );
    }

    let w1 = &battery[0].1;
    let ws = rearrange(w1, &RearrangementMap::Conjugation)?;
    let dist = distortion_from_factors(&cfg.factor(w1)?.f0, &cfg.factor(&ws)?.f0)?;
    rep.check(
        Check::near("distortion", dist, 2f64.sqrt(), 1e-5)
            .param("pair", "coupled(r=1)∘conjugation")
            .provenance(Provenance::Reference),
    );
    // f(γ) = γ loses its analytic part under conjugation.
    let gamma = MatrixCircleFunction::sample_fn(64, |t| CMat::from_element(1, 1, Complex64::from_polar(1.0, t)))?;
    let e_gamma = fourier::analytic_energy(&gamma, 31)?.energy[(0, 0)].re;
    let e_conj = fourier::analytic_energy(&gamma.conjugated(), 31)?.energy[(0, 0)].re;
    rep.check(Check::near("gamma_energy_gap_under_conjugation", e_gamma - e_conj, 1.0, 1e-12).provenance(Provenance::Reference));

    let origin = partition.eval(c64(0.0, 0.0))?.norm();
    rep.check(Check::at_most("partition_origin_value", origin, 1e-9).param("map", "partition"));
    let mo = inner::moments(&partition, 8, 1 << 14)?;
    let worst = mo.iter().map(|z| z.norm()).fold(0.0, f64::max);
    rep.check(Check::at_most("partition_max_moment", worst, 5e-3).param("map", "partition"));
    let img = inner::image_arc_check(&partition, 1 << 12)?;
    rep.check(
        Check::at_most("gamma1_cover_measure", img.gamma1_cover_measure(), img.gamma1_measure + img.slack)
            .param("map", "partition")
            .provenance(Provenance::Margin),
    );
    rep.check(
        Check::at_most("gamma0_cover_measure", img.gamma0_cover_measure(), 1.0 - img.gamma1_measure + img.slack)
            .param("map", "partition")
            .provenance(Provenance::Margin),
    );
    rep.check(Check::at_most("cover_overlap", img.overlap, img.slack).param("map", "partition").provenance(Provenance::Margin));
    rep.diag("partition.min_modulus", img.min_modulus);
    Ok(rep)
}

/// Solver against the closed form for two-valued weights, with `Γ₁` as one
/// arc and split in two.
pub fn run_two_valued(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let mut rep = Report::new("two-valued", cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let a1 = matrix::from_real_diagonal(&[4.0, 1.0]);
    let half = interp::two_valued_factor(&matrix::identity(2), &a1, 0.5)?;
    rep.check(
        Check::at_most("closed_form_gap", (half - matrix::from_real_diagonal(&[2.0, 1.0])).norm(), 1e-12)
            .param("case", "commuting")
            .provenance(Provenance::Trivial),
    );
    let one = interp::two_valued_factor(&matrix::identity(2), &a1, 1.0)?;
    rep.check(
        Check::at_most("closed_form_gap", (one - &a1).norm(), 1e-12)
            .param("case", "theta=1")
            .provenance(Provenance::Trivial),
    );

    let mut worst_one: f64 = 0.0;
    let mut worst_two: f64 = 0.0;
    for k in 0..cfg.pairs {
        let (a0, a1) = random_noncommuting_pair(&mut rng, cfg.dim);
        for &theta in &cfg.thetas {
            let label = format!("pair#{k},theta={theta}");
            let closed = interp::two_valued_factor(&a0, &a1, theta)?;
            if theta <= 0.0 || theta >= 1.0 {
                continue;
            }
            let one_arc = interp::two_valued_weight(&a0, &a1, &[Arc::from_span(0.0, TAU * theta)?])?;
            let two_arc = interp::two_valued_weight(
                &a0,
                &a1,
                &[Arc::from_span(0.0, PI * theta)?, Arc::from_span(PI, PI * theta)?],
            )?;
            let f1 = cfg.factor(&one_arc)?;
            let f2 = cfg.factor(&two_arc)?;
            let g1 = (&f1.m0 - &closed).norm();
            let g2 = (&f2.m0 - &closed).norm();
            rep.check(Check::at_most("one_arc_gap", g1, 1e-6).param("case", &label).provenance(Provenance::Reference));
            rep.check(Check::at_most("two_arc_gap", g2, 1e-6).param("case", &label).provenance(Provenance::Reference));
            rep.factor_diagnostics(&label, &f1);
            worst_one = worst_one.max(g1);
            worst_two = worst_two.max(g2);
        }
    }
    rep.value("max_one_arc_gap", json!(worst_one));
    rep.value("max_two_arc_gap", json!(worst_two));
    Ok(rep)
}

pub const EXPERIMENTS: [&str; 5] = ["conjugation-sweep", "three-arc", "quadrant", "inner-invariance", "two-valued"];

pub fn run_experiment(name: &str, cfg: &ExperimentConfig) -> Result<Report> {
    match name {
        "conjugation-sweep" => run_conjugation_sweep(cfg),
        "three-arc" => run_three_arc(cfg),
        "quadrant" => run_quadrant(cfg),
        "inner-invariance" => run_inner_invariance(cfg),
        "two-valued" => run_two_valued(cfg),
        other => Err(Error::InvalidParameter(format!("unknown experiment {other}"))),
    }
}

// ---------------------------------------------------------------------------
// Weight files

/// One arc `[start, end)` and its row-major matrix of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightPiece {
    pub arc: [f64; 2],
    pub value: Vec<[f64; 2]>,
}

/// JSON description of a weight: either `pieces` or `samples` (grid order,
/// `γ_j = e^{2πij/G}`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightFile {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pieces: Vec<WeightPiece>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<Vec<[f64; 2]>>,
}

impl WeightFile {
    pub fn to_function(&self) -> Result<MatrixCircleFunction> {
        match (self.pieces.is_empty(), self.samples.is_empty()) {
            (false, true) => {
                let arcs = self
                    .pieces
                    .iter()
                    .map(|p| Arc::new(p.arc[0], p.arc[1]))
                    .collect::<Result<Vec<_>>>()?;
                let values = self
                    .pieces
                    .iter()
                    .map(|p| matrix::from_row_major(self.dim, &p.value))
                    .collect::<Result<Vec<_>>>()?;
                MatrixCircleFunction::piecewise(ArcPartition::new(arcs)?, values)
            }
            (true, false) => MatrixCircleFunction::sampled(
                self.samples
                    .iter()
                    .map(|s| matrix::from_row_major(self.dim, s))
                    .collect::<Result<Vec<_>>>()?,
            ),
            _ => Err(Error::IncompatibleRepresentation(
                "weight file needs exactly one of pieces or samples".into(),
            )),
        }
    }

    pub fn from_function(w: &MatrixCircleFunction) -> Self {
        let dim = w.dim();
        match w.partition() {
            Some(p) => WeightFile {
                dim,
                pieces: p
                    .arcs()
                    .iter()
                    .zip(w.values())
                    .map(|(a, v)| WeightPiece {
                        arc: [a.start(), a.end()],
                        value: matrix::to_row_major(v),
                    })
                    .collect(),
                samples: Vec::new(),
            },
            None => WeightFile {
                dim,
                pieces: Vec::new(),
                samples: w.values().iter().map(matrix::to_row_major).collect(),
            },
        }
    }

    pub fn load(path: &Path) -> Result<MatrixCircleFunction> {
        let text = fs::read_to_string(path)?;
        let file: WeightFile = serde_json::from_str(&text)?;
        file.to_function()
    }
}

/// Report for a single weight.
pub fn factor_report(w: &MatrixCircleFunction, cfg: &ExperimentConfig, source: &str) -> Result<Report> {
    cfg.validate()?;
    let mut rep = Report::new("factor", cfg);
    let r = cfg.factor(w)?;
    rep.value("source", json!(source));
    rep.value("m0", matrix_json(&r.m0));
    rep.value("f0", matrix_json(&r.f0));
    rep.value("truncation", json!(r.truncation));
    rep.value("extrapolated", json!(r.extrapolated));
    rep.value("lambda", json!(r.lambda));
    rep.factor_diagnostics("weight", &r);
    if let Some(q) = r.neumann_ratio {
        rep.diag("weight.neumann_ratio", q);
    }
    rep.check(Check::at_most("f0_square_gap", (&r.f0 * &r.f0 - &r.m0).norm(), 1e-10).provenance(Provenance::Trivial));
    rep.check(Check::at_most("m0_hermitian_deviation", matrix::hermitian_deviation(&r.m0), 1e-12).provenance(Provenance::Trivial));
    Ok(rep)
}

/// Report comparing the spaces at the origin for two weights.
pub fn distortion_report(w: &MatrixCircleFunction, w2: &MatrixCircleFunction, cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    if w.dim() != w2.dim() {
        return Err(Error::DimensionMismatch {
            expected: w.dim(),
            found: w2.dim(),
        });
    }
    let mut rep = Report::new("distortion", cfg);
    let f = cfg.factor(w)?;
    let f2 = cfg.factor(w2)?;
    let forward = distortion_from_factors(&f.f0, &f2.f0)?;
    let backward = distortion_from_factors(&f2.f0, &f.f0)?;
    rep.value("m0_first", matrix_json(&f.m0));
    rep.value("m0_second", matrix_json(&f2.m0));
    rep.value("distortion", json!(forward));
    rep.value("distortion_reverse", json!(backward));
    rep.factor_diagnostics("first", &f);
    rep.factor_diagnostics("second", &f2);
    rep.check(Check::at_least("distortion_product", forward * backward, 1.0 - 1e-12).provenance(Provenance::Trivial));
    Ok(rep)
}
