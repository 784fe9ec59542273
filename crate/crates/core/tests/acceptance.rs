//! One line per acceptance criterion; exits nonzero if any fails.

use std::f64::consts::TAU;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use outerfn::circle::{Angle, Arc, ArcPartition};
use outerfn::experiments::{quadrant_constant, run_experiment, ExperimentConfig, Report};
use outerfn::factorization::{coupled_weight_m0, coupled_weight_sampled, solve_psi};
use outerfn::interp::{distortion_norm, rearrange, RearrangementMap};
use outerfn::matrix::{self, c64, from_real_diagonal, CMat};
use outerfn::{factor_at_zero, FactorOptions, MatrixCircleFunction, SolveMethod};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn worst(report: &Report, metric: &str) -> f64 {
    report
        .checks
        .iter()
        .filter(|c| c.metric == metric)
        .map(|c| c.value)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn failing(report: &Report) -> String {
    let f: Vec<String> = report.failures().map(|c| format!("{}[{}]={:e}", c.metric, c.param_value, c.value)).collect();
    if f.is_empty() {
        String::new()
    } else {
        format!(" failing: {}", f.join(" "))
    }
}

fn random_partition(rng: &mut ChaCha8Rng) -> ArcPartition {
    let k = rng.gen_range(2..=4);
    let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(1.0..3.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut start = rng.gen_range(0.0..TAU);
    let arcs = weights
        .iter()
        .map(|w| {
            let span = TAU * w / total;
            let a = Arc::from_span(start, span).unwrap();
            start += span;
            a
        })
        .collect();
    ArcPartition::new(arcs).unwrap()
}

fn random_pd(rng: &mut ChaCha8Rng) -> CMat {
    let b = CMat::from_fn(2, 2, |_, _| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    matrix::hermitian_part(&(b.adjoint() * &b + matrix::identity(2) * c64(0.5, 0.0)))
}

fn random_weight(rng: &mut ChaCha8Rng) -> MatrixCircleFunction {
    let p = random_partition(rng);
    let values = (0..p.len()).map(|_| random_pd(rng)).collect();
    MatrixCircleFunction::piecewise(p, values).unwrap()
}

fn criterion_1() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for r in [0.5, 1.0, 2.0] {
        let start = Instant::now();
        let w = coupled_weight_sampled(r, 1 << 12).unwrap();
        let res = factor_at_zero(&w, FactorOptions::with_truncation(256)).unwrap();
        let secs = start.elapsed().as_secs_f64();
        let expected = from_real_diagonal(&[(1.0 + r * r).sqrt(), 1.0 / (1.0 + r * r).sqrt()]);
        let err = (&res.m0 - &expected).norm().max((&res.m0 - coupled_weight_m0(r)).norm());
        pass &= err <= 1e-6 && secs < 5.0;
        parts.push(format!("r={r}: err {err:.1e} in {secs:.2}s"));
    }
    Outcome { pass, detail: parts.join(", ") }
}

fn criterion_2() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for r in [0.5, 1.0, 2.0] {
        let w = coupled_weight_sampled(r, 1 << 12).unwrap();
        let ws = rearrange(&w, &RearrangementMap::Conjugation).unwrap();
        let d = distortion_norm(&w, &ws, FactorOptions::with_truncation(256)).unwrap();
        let err = (d - (1.0 + r * r).sqrt()).abs();
        pass &= err <= 1e-6;
        parts.push(format!("r={r}: {d:.9} (err {err:.1e})"));
    }
    Outcome { pass, detail: parts.join(", ") }
}

fn criterion_3() -> Outcome {
    let cfg = ExperimentConfig { pairs: 20, thetas: vec![0.25, 0.5, 0.7], ..ExperimentConfig::default() };
    let rep = run_experiment("two-valued", &cfg).unwrap();
    let pass = rep.passed()
        && worst(&rep, "closed_form_gap") <= 1e-6
        && worst(&rep, "one_arc_gap") <= 1e-6
        && worst(&rep, "two_arc_gap") <= 1e-6;
    Outcome {
        pass,
        detail: format!(
            "20 pairs x 3 thetas; one-arc gap {:.1e}, two-arc gap {:.1e}{}",
            worst(&rep, "one_arc_gap"),
            worst(&rep, "two_arc_gap"),
            failing(&rep)
        ),
    }
}

fn three_arc_report() -> Report {
    let cfg = ExperimentConfig { epsilons: vec![0.2, 0.1, 0.05], ..ExperimentConfig::default() };
    run_experiment("three-arc", &cfg).unwrap()
}

fn criterion_4(rep: &Report) -> Outcome {
    let ratios: Vec<f64> = rep.checks.iter().filter(|c| c.metric == "second_order_halving_ratio").map(|c| c.value).collect();
    let ratios_ok = ratios.len() == 2 && ratios.iter().all(|r| (6.0..=10.0).contains(r));
    let mut witness = 0.0f64;
    for eps in [0.1, 0.3] {
        let w = MatrixCircleFunction::sample_fn(128, |t| {
            let g = Complex64::from_polar(eps, t);
            matrix::identity(2) + matrix::unit(2, 0, 1) * g + matrix::unit(2, 1, 0) * g.conj()
        })
        .unwrap();
        let m0 = factor_at_zero(&w, FactorOptions::with_truncation(32)).unwrap().m0;
        witness = witness.max((m0 - from_real_diagonal(&[1.0, 1.0 - eps * eps])).norm());
    }
    Outcome {
        pass: ratios_ok && witness <= 1e-8,
        detail: format!("halving ratios {ratios:.3?}, exact witness err {witness:.1e}"),
    }
}

fn criterion_5(rep: &Report) -> Outcome {
    let d = worst(rep, "energy_difference_norm");
    let series = worst(rep, "energy_difference_vs_series");
    let ip = rep.checks.iter().find(|c| c.metric == "im_inner_product_t1_t2").unwrap();
    let dist = rep.values["distortion[eps=0.1]"].as_f64().unwrap();
    Outcome {
        pass: d > 1e-3 && series <= 1e-8 && ip.pass && dist > 1.0,
        detail: format!("|D| = {d:.6}, series gap {series:.1e}, Im<> = {:.10}, distortion(0.1) = {dist:.8}", ip.value),
    }
}

fn criterion_6() -> Outcome {
    let rep = run_experiment("quadrant", &ExperimentConfig::default()).unwrap();
    let ip = rep.checks.iter().find(|c| c.metric == "im_inner_product_q1_q2").unwrap();
    let sym = worst(&rep, "symmetric_m0_identity_gap");
    let dev = worst(&rep, "max_m0_deviation");
    Outcome {
        pass: rep.passed() && (ip.value - quadrant_constant(1_000_000).value).abs() <= 1e-10 && sym <= 1e-6,
        detail: format!("Im<Q1,Q2> = {:.12}, symmetric gap {sym:.1e}, W^(a,0.1) deviation {dev:.5}{}", ip.value, failing(&rep)),
    }
}

fn criterion_7() -> Outcome {
    let rep = run_experiment("inner-invariance", &ExperimentConfig::default()).unwrap();
    let exact = |metric: &str| {
        rep.checks
            .iter()
            .filter(|c| c.metric == metric && !c.param_value.ends_with("partition"))
            .map(|c| c.value)
            .fold(0.0, f64::max)
    };
    let energy = exact("energy_gap");
    let m0 = exact("m0_gap");
    Outcome {
        pass: rep.passed() && energy <= 1e-5 && m0 <= 1e-5,
        detail: format!(
            "energy gap {energy:.1e}, M0 gap {m0:.1e}, moment {:.1e}, origin {:.1e}{}",
            worst(&rep, "partition_max_moment"),
            worst(&rep, "partition_origin_value"),
            failing(&rep)
        ),
    }
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let fine = FactorOptions::extrapolated(1 << 15);
    let coarse = FactorOptions::with_truncation(128);

    let mut szego = 0.0f64;
    for _ in 0..4 {
        let p = random_partition(&mut rng);
        let diag: Vec<[f64; 2]> = (0..p.len()).map(|_| [rng.gen_range(0.5..4.0), rng.gen_range(0.5..4.0)]).collect();
        let m = p.measures();
        let expected: Vec<f64> =
            (0..2).map(|k| diag.iter().zip(&m).map(|(d, w)| w * d[k].ln()).sum::<f64>().exp()).collect();
        let w = MatrixCircleFunction::piecewise(p, diag.iter().map(|d| from_real_diagonal(d)).collect()).unwrap();
        let m0 = factor_at_zero(&w, fine).unwrap().m0;
        szego = szego.max((m0 - from_real_diagonal(&expected)).norm());
    }

    let mut solver = 0.0f64;
    for _ in 0..10 {
        let p = random_partition(&mut rng);
        let target = rng.gen_range(0.1..0.9);
        let raw: Vec<CMat> = (0..p.len()).map(|_| random_pd(&mut rng) - matrix::identity(2) * c64(1.5, 0.0)).collect();
        let scale = raw.iter().map(matrix::op_norm).fold(0.0, f64::max);
        let delta = MatrixCircleFunction::piecewise(p, raw.iter().map(|v| v * c64(target / scale, 0.0)).collect()).unwrap();
        let direct = solve_psi(&delta, 64, SolveMethod::Direct).unwrap().psi;
        for method in [SolveMethod::Neumann, SolveMethod::ConjugateGradient] {
            let other = solve_psi(&delta, 64, method).unwrap().psi;
            for ((_, x), (_, y)) in other.iter().zip(direct.iter()) {
                solver = solver.max((x - y).norm());
            }
        }
    }

    let mut covariance = 0.0f64;
    for _ in 0..5 {
        let w = random_weight(&mut rng);
        let m0 = factor_at_zero(&w, coarse).unwrap().m0;
        let lam = rng.gen_range(0.5..10.0);
        let ws = w.map_values(|v| Ok(v * c64(lam, 0.0))).unwrap();
        covariance = covariance.max((factor_at_zero(&ws, coarse).unwrap().m0 - &m0 * c64(lam, 0.0)).norm() / lam);
        let u = CMat::from_fn(2, 2, |_, _| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).qr().q();
        let wu = w.map_values(|v| Ok(matrix::hermitian_part(&(u.adjoint() * v * &u)))).unwrap();
        covariance = covariance.max((factor_at_zero(&wu, coarse).unwrap().m0 - u.adjoint() * &m0 * &u).norm());
        let wr = rearrange(&w, &RearrangementMap::Rotation(Angle::new(rng.gen_range(0.0..TAU)))).unwrap();
        covariance = covariance.max((factor_at_zero(&wr, coarse).unwrap().m0 - &m0).norm());
    }

    let mut duality = 0.0f64;
    for _ in 0..3 {
        let w = random_weight(&mut rng);
        let wd = w.map_values(|v| Ok(matrix::hermitian_part(&matrix::inverse_transpose(v)?))).unwrap();
        let m0 = factor_at_zero(&w, fine).unwrap().m0;
        let m0d = factor_at_zero(&wd, fine).unwrap().m0;
        duality = duality.max((m0d - matrix::inverse_transpose(&m0).unwrap()).norm());
    }

    Outcome {
        pass: szego <= 1e-8 && solver <= 1e-11 && covariance <= 1e-9 && duality <= 1e-8,
        detail: format!("Szego {szego:.1e}, solvers {solver:.1e}, covariance {covariance:.1e}, duality {duality:.1e}"),
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut all = true;
    let mut report = |n: usize, name: &str, t: Instant, o: Outcome| {
        all &= o.pass;
        println!(
            "criterion {n} [{}] {name} ({:.1}s): {}",
            if o.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            o.detail
        );
    };
    let t = Instant::now();
    report(1, "coupled weight closed form", t, criterion_1());
    let t = Instant::now();
    report(2, "conjugation distortion", t, criterion_2());
    let t = Instant::now();
    report(3, "two-valued agreement", t, criterion_3());
    let t = Instant::now();
    let rep = three_arc_report();
    report(4, "second-order formula", t, criterion_4(&rep));
    report(5, "three-arc non-invariance", t, criterion_5(&rep));
    let t = Instant::now();
    report(6, "quadrant identity", t, criterion_6());
    let t = Instant::now();
    report(7, "inner invariance", t, criterion_7());
    let t = Instant::now();
    let o = criterion_8();
    let suite = t.elapsed().as_secs_f64();
    report(8, "oracle suite", t, Outcome { pass: o.pass && suite < 180.0, detail: o.detail });
    let total = start.elapsed().as_secs_f64();
    println!("acceptance total {total:.1}s: {}", if all { "all criteria pass" } else { "FAILURES" });
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
