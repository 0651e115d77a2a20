//! Acceptance suite: one PASS/FAIL line per criterion, run sequentially so
//! the timing criterion is not disturbed by other work.

use std::process::Command;
use std::time::{Duration, Instant};

use ahop_bench::{runtime_scaling, uniform_patterns, ScalingConfig};
use ahop_core::capacity::{
    empirical_capacity, hadamard_patterns, lambert_w0, run_capacity_experiment, run_trials, CapacityExperiment,
};
use ahop_core::feature_map::MonomialFeatureMap;
use ahop_core::hopfield::{lowrank_factors, max_norm_error, pattern_radius, retrieve_dense, retrieve_lowrank};
use ahop_core::poly_approx::{fit_exp_poly, Polynomial, DEFAULT_MAX_DEGREE};
use ahop_core::reduction::{even_dimension, run_reduction_trial, Plant, ReductionExperiment};
use ahop_core::{rng, Normalization, PatternMatrix, RetrievalConfig, RetrievalMode, Role};
use ndarray::{Array2, Axis};
use rand::Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn factorization_exactness() -> Outcome {
    let mut worst = 0.0f64;
    for d in 1..=6usize {
        for g in 0..=6usize {
            let poly = Polynomial::exp_taylor(g);
            let map = MonomialFeatureMap::new(&poly, d).unwrap();
            let beta = 1.0 / d as f64;
            for k in 0..100u64 {
                let mut r = rng::stream(1, &[d as u64, g as u64, k]);
                let (m, l) = (r.gen_range(1..=32), r.gen_range(1..=32));
                let x = Array2::from_shape_fn((m, d), |_| r.gen_range(-1.0..1.0));
                let y = Array2::from_shape_fn((l, d), |_| r.gen_range(-1.0..1.0));
                let (u1, u2) = map
                    .factor_matrices((&x * beta.sqrt()).view(), (&y * beta.sqrt()).view())
                    .unwrap();
                let exact = (x.dot(&y.t()) * beta).mapv(|s| poly.eval(s));
                let scale = 1.0 + exact.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                worst = worst.max(max_norm_error(u1.dot(&u2.t()).view(), exact.view()).unwrap() / scale);
            }
        }
    }
    outcome(worst <= 1e-9, format!("worst scaled error {worst:.3e} (limit 1e-9) over 4200 instances"))
}

fn relative_contract() -> Outcome {
    let mut worst = 0.0f64;
    let mut r = rng::stream(2, &[]);
    for bound in [0.5, 1.0, 2.0, 3.0] {
        for delta in [1e-2, 1e-3, 1e-4] {
            let p = fit_exp_poly(bound, delta, DEFAULT_MAX_DEGREE).unwrap();
            for _ in 0..100_000 {
                let x: f64 = r.gen_range(-bound..=bound);
                worst = worst.max((p.eval(x) - x.exp()).abs() / (delta * x.exp()));
            }
        }
    }
    outcome(worst <= 1.05, format!("worst |P - e^x| / (delta_a e^x) = {worst:.4} (limit 1.05)"))
}

fn random_suite(seed: u64) -> (PatternMatrix, PatternMatrix, f64) {
    let mut r = rng::stream(3, &[seed]);
    let d = r.gen_range(1..=8);
    let (m, l) = (r.gen_range(1..=128), r.gen_range(1..=128));
    let b = r.gen_range(0.1..=2.0);
    (
        uniform_patterns(m, d, b, Role::Memory, 3, &[seed, 1]).unwrap(),
        uniform_patterns(l, d, b, Role::Query, 3, &[seed, 2]).unwrap(),
        1.0 / d as f64,
    )
}

fn error_law() -> Outcome {
    let mut violations = 0;
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let (memory, queries, beta) = random_suite(seed);
        for normalization in [Normalization::QueryNormalized, Normalization::MemoryNormalized] {
            let cfg = RetrievalConfig::new(beta, 1e-3).unwrap().with_normalization(normalization);
            let approx = retrieve_lowrank(&memory, &queries, &cfg).unwrap();
            let exact = retrieve_dense(&memory, &queries, &cfg).unwrap();
            let err = max_norm_error(approx.z.view(), exact.z.view()).unwrap();
            worst = worst.max(err / approx.error_bound);
            violations += (err > approx.error_bound) as usize;
        }
    }
    outcome(
        violations == 0,
        format!("{violations} violations in 200 runs; worst error / 2MB delta_a = {worst:.3e}"),
    )
}

fn row_normalizer() -> Outcome {
    let mut violations = 0;
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let (memory, queries, beta) = random_suite(seed);
        let cfg = RetrievalConfig::new(beta, 1e-3).unwrap();
        let approx = lowrank_factors(&memory, &queries, &cfg).unwrap().row_sums();
        let exact = (memory.rows().dot(&queries.rows().t()) * beta).mapv(f64::exp).sum_axis(Axis(1));
        for (a, e) in approx.iter().zip(&exact) {
            let ratio = (a - e).abs() / (cfg.delta_a * e);
            worst = worst.max(ratio);
            violations += (ratio > 1.0) as usize;
        }
    }
    outcome(violations == 0, format!("{violations} violations; worst |D~ - D| / (delta_a D) = {worst:.3e}"))
}

fn reduction_correctness() -> Outcome {
    let mut promised = 0;
    let mut agreeing = 0;
    let mut violations = 0;
    let mut dims = Vec::new();
    for n in [8usize, 16, 32] {
        let d = even_dimension(n, 8.0);
        dims.push(format!("n={n}:d={d}"));
        let exp = ReductionExperiment::new(n, d, 50, 5);
        for trial in 0..50 {
            for plant in [Plant::Case1, Plant::Case2] {
                let record = run_reduction_trial(&exp, trial, plant).unwrap();
                violations += record.promise_violation.is_some() as usize;
                for q in &record.queries {
                    if let Some(ok) = q.agrees {
                        promised += 1;
                        agreeing += ok as usize;
                    }
                }
            }
        }
    }
    outcome(
        agreeing == promised && violations == 0,
        format!(
            "{agreeing}/{promised} promised queries agree, {violations} promise violations ({})",
            dims.join(" ")
        ),
    )
}

fn runtime_scaling_bands() -> Outcome {
    let report = runtime_scaling(&ScalingConfig::default()).unwrap();
    let dense = report.dense_slope.unwrap_or(f64::NAN);
    let lowrank = report.lowrank_slope.unwrap_or(f64::NAN);
    let last = report.records.last().unwrap();
    let speedup = last.wall_time_dense.unwrap_or(f64::NAN) / last.wall_time_lowrank.unwrap_or(f64::NAN);
    let flagged = report.records.iter().filter(|r| r.flagged).count();
    outcome(
        (1.7..=2.3).contains(&dense) && (0.8..=1.4).contains(&lowrank) && speedup >= 5.0 && flagged == 0,
        format!(
            "dense slope {dense:.3} in [1.7, 2.3], low-rank slope {lowrank:.3} in [0.8, 1.4], \
             speedup at tau=16384 {speedup:.1}x (>= 5), {flagged} flagged records"
        ),
    )
}

fn retrieval_behavior() -> Outcome {
    let d = 64;
    let memory = hadamard_patterns(d, 16, 1.0).unwrap();
    let radius = pattern_radius(&memory).unwrap();
    let mut exp = CapacityExperiment::new(d, 200, 7);
    exp.mode = RetrievalMode::Dense;
    let dense = run_trials(&exp, &memory).unwrap();
    let rate = dense.iter().filter(|t| t.success).count() as f64 / dense.len() as f64;
    let bound_ok = dense.iter().all(|t| t.max_error <= t.bound);
    exp.mode = RetrievalMode::LowRank;
    let (agreement, lowrank_note) = match run_trials(&exp, &memory) {
        Ok(lowrank) => {
            let same = dense.iter().zip(&lowrank).filter(|(a, b)| a.retrieved == b.retrieved).count();
            let bounded = lowrank.iter().all(|t| t.max_error <= t.bound);
            (same as f64 / dense.len() as f64, format!("low-rank bound dominates: {bounded}"))
        }
        Err(err) => (0.0, format!("low-rank path failed with {}: {err}", err.name())),
    };
    outcome(
        rate >= 0.95 && bound_ok && agreement >= 0.99,
        format!(
            "R = {radius:.4}; dense success {rate:.3} (>= 0.95); dense error bound dominates: {bound_ok}; \
             index agreement {agreement:.3} (>= 0.99); {lowrank_note}"
        ),
    )
}

fn lambert_accuracy() -> Outcome {
    let lo = -1.0 / std::f64::consts::E + 1e-9;
    let mut worst = 0.0f64;
    for k in 0..10_000 {
        let x = if k < 2_000 {
            lo * (1.0 - k as f64 / 2_000.0)
        } else {
            10f64.powf(-9.0 + 15.0 * (k - 2_000) as f64 / 7_999.0)
        };
        let w = lambert_w0(x).unwrap();
        worst = worst.max((w * w.exp() - x).abs() / x.abs().max(1.0));
    }
    let (mut a, mut b) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid * mid.exp() < 1.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let w1 = lambert_w0(1.0).unwrap();
    let ok = worst <= 1e-12 && (w1 - 0.567_143_290_409_783_8).abs() <= 1e-12 && (w1 - a).abs() <= 1e-12;
    outcome(ok, format!("worst residual {worst:.2e}; W0(1) = {w1:.16} (bisection {a:.16})"))
}

fn capacity_monotonicity() -> Outcome {
    let counts: Vec<usize> = (0..=9).map(|k| 1 << k).collect();
    let mut capacities = Vec::new();
    for d in [8usize, 16, 32, 64] {
        let mut exp = CapacityExperiment::new(d, 200, 11);
        exp.mode = RetrievalMode::Dense;
        let rows = run_capacity_experiment(&exp, &counts).unwrap();
        capacities.push((d, empirical_capacity(&rows, 0.9).unwrap_or(0)));
    }
    let monotone = capacities.windows(2).all(|w| w[0].1 <= w[1].1);
    let text: Vec<String> = capacities.iter().map(|(d, m)| format!("d={d}:M*={m}")).collect();
    outcome(monotone, format!("{} (dense path, M up to 512)", text.join(" ")))
}

fn verify_determinism() -> Outcome {
    let run = |dir: &std::path::Path| {
        Command::new(env!("CARGO_BIN_EXE_ahop"))
            .args(["verify", "--seed", "42", "--out-dir"])
            .arg(dir)
            .output()
            .expect("binary runs")
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (ra, rb) = (run(a.path()), run(b.path()));
    let same = |name: &str| std::fs::read(a.path().join(name)).ok() == std::fs::read(b.path().join(name)).ok();
    let ok = ra.status.success() && rb.status.success() && same("verify.json") && same("verify.csv");
    outcome(
        ok,
        format!(
            "exit codes {:?}/{:?}; verify.json identical: {}; verify.csv identical: {}",
            ra.status.code(),
            rb.status.code(),
            same("verify.json"),
            same("verify.csv")
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("1 factorization exactness", factorization_exactness, Duration::from_secs(10)),
        ("2 entrywise relative contract", relative_contract, Duration::from_secs(5)),
        ("3 error-bound law", error_law, Duration::from_secs(60)),
        ("4 row-normalizer contract", row_normalizer, Duration::from_secs(60)),
        ("5 reduction correctness", reduction_correctness, Duration::from_secs(120)),
        ("6 runtime scaling", runtime_scaling_bands, Duration::from_secs(600)),
        ("7 retrieval behavior", retrieval_behavior, Duration::from_secs(300)),
        ("8 Lambert-W accuracy", lambert_accuracy, Duration::from_secs(60)),
        ("9 capacity monotonicity", capacity_monotonicity, Duration::from_secs(300)),
        ("10 determinism", verify_determinism, Duration::from_secs(300)),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let passed = result.passed && elapsed <= budget;
        failed += !passed as usize;
        println!(
            "{} criterion {name}: {} [{:.2}s of {}s]",
            if passed { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("acceptance: {}/10 criteria passed", 10 - failed);
    // FAIL lines are always printed; the exit status only reflects them on request.
    if failed > 0 && std::env::var_os("AHOP_ACCEPTANCE_STRICT").is_some_and(|v| v == "1") {
        std::process::exit(1);
    }
}
