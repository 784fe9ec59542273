use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use outerfn::circle::{Arc, ArcPartition};
use outerfn::fourier::{self, evaluate, pplus_energy, pplus_inner_product, project_plus, MatrixCircleFunction};
use outerfn::matrix::{self, c64, CMat};
use outerfn::series::lattice_series;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scalar(z: Complex64) -> CMat {
    CMat::from_element(1, 1, z)
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    let b = CMat::from_fn(n, n, |_, _| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    matrix::hermitian_part(&b)
}

fn three_arcs() -> ArcPartition {
    ArcPartition::uniform(3).unwrap()
}

/// Composite Simpson rule for `∫_arc f(θ) e^{-inθ} dθ/2π` with `nodes` panels.
fn simpson_coeff(arc: &Arc, n: i64, nodes: usize) -> Complex64 {
    let h = arc.span() / nodes as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..=nodes {
        let w = if k == 0 || k == nodes {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += Complex64::from_polar(w, -(n as f64) * (arc.start() + k as f64 * h));
    }
    acc * (h / 3.0) / TAU
}

#[test]
fn indicator_matches_difference_quotient() {
    let arcs = [Arc::new(0.0, TAU / 3.0).unwrap(), Arc::new(5.0, 7.5).unwrap(), Arc::new(1.0, 1.3).unwrap()];
    for arc in &arcs {
        for n in [-7i64, -1, 1, 2, 13, 1000] {
            let nf = n as f64;
            let expected = (Complex64::from_polar(1.0, -nf * arc.start()) - Complex64::from_polar(1.0, -nf * arc.end()))
                / Complex64::new(0.0, TAU * nf);
            assert!((fourier::indicator_fourier(arc, n) - expected).norm() < 1e-14);
        }
    }
    assert!((fourier::indicator_fourier(&arcs[0], 0).re - 1.0 / 3.0).abs() < 1e-15);
    for n in [1, 2, 50] {
        assert!(fourier::indicator_fourier(&Arc::full(), n).norm() < 1e-15);
    }
}

#[test]
fn three_arc_cross_terms() {
    let p = three_arcs();
    let (t1, t2) = (p.arcs()[0], p.arcs()[1]);
    let base = (2.0 * PI / 3.0).sin() * (1.0 - (2.0 * PI / 3.0).cos()) / (2.0 * PI * PI);
    for n in 1..=30i64 {
        let v = (fourier::indicator_fourier(&t1, n) * fourier::indicator_fourier(&t2, n).conj()).im;
        let pattern = [0.0, 1.0, -1.0][(n % 3) as usize];
        assert!((v - base * pattern / (n * n) as f64).abs() < 1e-15, "n = {n}");
    }
}

#[test]
fn piecewise_coefficients_match_arcwise_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let p = three_arcs();
    let vals: Vec<CMat> = (0..3).map(|_| random_hermitian(&mut rng, 2)).collect();
    let f = MatrixCircleFunction::piecewise(p.clone(), vals.clone()).unwrap();
    for n in [-5i64, 0, 1, 4, 17] {
        let mut oracle = matrix::zeros(2);
        for (arc, v) in p.arcs().iter().zip(&vals) {
            oracle += v * simpson_coeff(arc, n, 1 << 14);
        }
        assert!((f.fourier_coeff(n).unwrap() - oracle).norm() < 1e-10, "n = {n}");
    }
}

#[test]
fn constant_and_single_frequency_coefficients() {
    let a = CMat::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(0.0, 2.0), c64(0.0, -2.0), c64(3.0, 0.0)]);
    let f = MatrixCircleFunction::constant(a.clone()).unwrap();
    assert!((f.fourier_coeff(0).unwrap() - &a).norm() < 1e-15);
    assert!(f.fourier_coeff(3).unwrap().norm() < 1e-15);
    let swap = MatrixCircleFunction::sample_fn(64, |t| {
        let g = Complex64::from_polar(1.0, t);
        matrix::unit(2, 0, 1) * g + matrix::unit(2, 1, 0) * g.conj()
    })
    .unwrap();
    assert!((swap.fourier_coeff(1).unwrap() - matrix::unit(2, 0, 1)).norm() < 1e-14);
    assert!((swap.fourier_coeff(-1).unwrap() - matrix::unit(2, 1, 0)).norm() < 1e-14);
    for n in [0, 2, -2, 31, -31] {
        assert!(swap.fourier_coeff(n).unwrap().norm() < 1e-14);
    }
    assert!(swap.fourier_coeff(32).is_err());
}

#[test]
fn projections_of_characters() {
    let gamma = MatrixCircleFunction::sample_fn(32, |t| scalar(Complex64::from_polar(1.0, t))).unwrap();
    let gbar = gamma.conjugated();
    let pg = project_plus(&gamma.fourier_coeffs(8).unwrap());
    let pgb = project_plus(&gbar.fourier_coeffs(8).unwrap());
    let norm2 = |c: &outerfn::MatrixFourierCoeffs| c.iter().map(|(_, m)| m.norm_squared()).sum::<f64>();
    assert!((norm2(&pg) - 1.0).abs() < 1e-14);
    assert!(norm2(&pgb) < 1e-28);
    let konst = MatrixCircleFunction::constant(scalar(c64(2.0, 0.0))).unwrap();
    assert!(norm2(&project_plus(&konst.fourier_coeffs(4).unwrap())) < 1e-30);
}

#[test]
fn indicator_energy_is_half_variance() {
    for (s, e) in [(0.0, PI), (1.0, 2.0), (4.0, 7.0)] {
        let arc = Arc::new(s, e).unwrap();
        let m = arc.measure();
        let r = pplus_inner_product(&arc, &arc, 1_000_000).unwrap();
        assert!(r.value.im.abs() < 1e-15);
        assert!((r.value.re - (m - m * m) / 2.0).abs() <= r.tail_bound);
    }
}

#[test]
fn three_arc_inner_product_series() {
    let p = three_arcs();
    let r = pplus_inner_product(&p.arcs()[0], &p.arcs()[1], 1_000_000).unwrap();
    let s3 = lattice_series(3, 1_000_000);
    let expected = 9.0 * 3f64.sqrt() / (8.0 * PI * PI) * s3.value;
    assert!((r.value.im - expected).abs() < 1e-8);
    assert!((s3.value - 0.2604341376321594).abs() < 1e-12);
    let r13 = pplus_inner_product(&p.arcs()[0], &p.arcs()[2], 1_000_000).unwrap();
    assert!((r13.value - r.value.conj()).norm() < 1e-10);
}

#[test]
fn quadrant_inner_product_series() {
    let q = ArcPartition::uniform(4).unwrap();
    let r = pplus_inner_product(&q.arcs()[0], &q.arcs()[1], 1_000_000).unwrap();
    let s4 = lattice_series(4, 1_000_000);
    assert!((r.value.im - 4.0 / (PI * PI) * s4.value).abs() < 1e-10);
    assert!((s4.value - 0.11449569927215).abs() < 1e-12);
    assert!((r.value.re + 1.0 / 32.0).abs() < 1e-6);
}

#[test]
fn inner_product_is_conjugate_symmetric() {
    let a = Arc::new(0.3, 2.0).unwrap();
    let b = Arc::new(1.5, 5.0).unwrap();
    let ab = pplus_inner_product(&a, &b, 10_000).unwrap().value;
    let ba = pplus_inner_product(&b, &a, 10_000).unwrap().value;
    assert!((ab - ba.conj()).norm() < 1e-15);
}

#[test]
fn two_valued_energy_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let d1 = random_hermitian(&mut rng, 2);
        let d2 = random_hermitian(&mut rng, 2);
        let s = rng.gen_range(0.0..TAU);
        let span = rng.gen_range(0.1..6.0);
        let a = Arc::from_span(s, span).unwrap();
        let ac = Arc::from_span(s + span, TAU - span).unwrap();
        let f = MatrixCircleFunction::piecewise(ArcPartition::new(vec![a, ac]).unwrap(), vec![d1.clone(), d2.clone()]).unwrap();
        let e = pplus_energy(&f, 1_000_000).unwrap();
        let m = a.measure();
        let diff = &d1 - &d2;
        let expected = diff.adjoint() * &diff * c64((m - m * m) / 2.0, 0.0);
        assert!((e.energy - expected).norm() <= e.tail_bound);
    }
}

#[test]
fn real_scalar_energy_is_half_variance() {
    let vals = [0.3, -1.2, 2.0, 0.7];
    let p = ArcPartition::new(vec![
        Arc::new(0.0, 1.0).unwrap(),
        Arc::new(1.0, 2.5).unwrap(),
        Arc::new(2.5, 4.0).unwrap(),
        Arc::new(4.0, TAU).unwrap(),
    ])
    .unwrap();
    let m = p.measures();
    let f = MatrixCircleFunction::piecewise(p, vals.iter().map(|&v| scalar(c64(v, 0.0))).collect()).unwrap();
    let mean: f64 = vals.iter().zip(&m).map(|(v, w)| v * w).sum();
    let second: f64 = vals.iter().zip(&m).map(|(v, w)| v * v * w).sum();
    let e = pplus_energy(&f, 1_000_000).unwrap();
    assert!((2.0 * e.energy[(0, 0)].re - (second - mean * mean)).abs() <= 2.0 * e.tail_bound);
    let ec = fourier::analytic_energy(&f.conjugated(), 1_000_000).unwrap();
    assert!((ec.energy[(0, 0)].re - e.energy[(0, 0)].re).abs() < 1e-12);
}

#[test]
fn conjugation_changes_complex_energy() {
    let gamma = MatrixCircleFunction::sample_fn(64, |t| scalar(Complex64::from_polar(1.0, t))).unwrap();
    let e = fourier::analytic_energy(&gamma, 31).unwrap().energy[(0, 0)].re;
    let ec = fourier::analytic_energy(&gamma.conjugated(), 31).unwrap().energy[(0, 0)].re;
    assert!((e - 1.0).abs() < 1e-14);
    assert!(ec.abs() < 1e-28);
}

#[test]
fn evaluate_round_trip() {
    let f = MatrixCircleFunction::sample_fn(64, |t| {
        let g = Complex64::from_polar(1.0, t);
        let a = matrix::unit(2, 0, 1) * (g * 0.5 + g * g * c64(0.0, 0.2)) + matrix::unit(2, 0, 0) * c64(1.0 + t.cos(), 0.0);
        matrix::hermitian_part(&(a.clone() + a.adjoint()))
    })
    .unwrap();
    let c = f.fourier_coeffs(31).unwrap();
    for j in 0..64 {
        let t = fourier::grid_angle(j, 64);
        assert!((evaluate(&c, t) - &f.values()[j]).norm() < 1e-10);
    }
    let single = outerfn::MatrixFourierCoeffs::from_entries(2, 0, vec![(0, matrix::identity(2))]).unwrap();
    assert!((evaluate(&single, 1.234) - matrix::identity(2)).norm() < 1e-15);
}

#[test]
fn parseval_is_monotone_and_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let vals: Vec<CMat> = (0..3).map(|_| random_hermitian(&mut rng, 2)).collect();
    let p = three_arcs();
    let total: f64 = vals.iter().zip(p.measures()).map(|(v, m)| (v.adjoint() * v).trace().re * m).sum();
    let f = MatrixCircleFunction::piecewise(p, vals).unwrap();
    let mut prev = 0.0;
    for k in 4..=12 {
        let c = f.fourier_coeffs(1 << k).unwrap();
        let s: f64 = c.iter().map(|(_, m)| (m.adjoint() * m).trace().re).sum();
        assert!(s > prev && s <= total + 1e-12);
        prev = s;
    }
    assert!(total - prev < 1e-3);
}

#[test]
fn hermitian_symmetry_of_coefficients() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let vals: Vec<CMat> = (0..3).map(|_| random_hermitian(&mut rng, 3)).collect();
    let f = MatrixCircleFunction::piecewise(three_arcs(), vals).unwrap();
    assert_eq!(f.fourier_coeffs(40).unwrap().hermitian_symmetry_defect(), 0.0);
    let s = MatrixCircleFunction::sample_fn(256, |t| f.value_at(t)).unwrap();
    assert!(s.fourier_coeffs(100).unwrap().hermitian_symmetry_defect() < 1e-12);
}

#[test]
fn rotation_covariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let vals: Vec<CMat> = (0..3).map(|_| random_hermitian(&mut rng, 2)).collect();
    let p = three_arcs();
    let beta = 0.9;
    let f = MatrixCircleFunction::piecewise(p.clone(), vals.clone()).unwrap();
    let g = MatrixCircleFunction::piecewise(p.rotated(beta), vals).unwrap();
    for n in [-3i64, 1, 2, 10] {
        let expected = f.fourier_coeff(n).unwrap() * Complex64::from_polar(1.0, -(n as f64) * beta);
        assert!((g.fourier_coeff(n).unwrap() - expected).norm() < 1e-14);
    }
    let ef = pplus_energy(&f, 100_000).unwrap().energy;
    let eg = pplus_energy(&g, 100_000).unwrap().energy;
    assert!((ef - eg).norm() < 1e-12);
}

#[test]
fn energy_rejects_non_hermitian_values() {
    let f = MatrixCircleFunction::constant(matrix::unit(2, 0, 1)).unwrap();
    assert!(matches!(pplus_energy(&f, 10), Err(outerfn::Error::NotHermitian { .. })));
}
