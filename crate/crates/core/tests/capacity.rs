use ahop_core::capacity::*;
use ahop_core::hopfield::RetrievalMode;
use ahop_core::Error;

fn base_params() -> CapacityParams {
    CapacityParams {
        p: 4.0,
        d: 9,
        m: 10.0,
        beta: 1.0,
        r: 1.0,
        memories: 2,
        norm_bound: 1.0,
        delta_a: 1e-3,
    }
}

#[test]
fn lambert_residual_over_log_grid() {
    let lo = -1.0 / std::f64::consts::E + 1e-9;
    let mut worst = 0.0f64;
    for k in 0..10_000 {
        let x = if k < 2_000 {
            lo + (0.0 - lo) * (k as f64 / 2_000.0)
        } else {
            10f64.powf(-9.0 + 15.0 * (k - 2_000) as f64 / 7_999.0)
        };
        let w = lambert_w0(x).unwrap();
        worst = worst.max((w * w.exp() - x).abs() / x.abs().max(1.0));
    }
    assert!(worst <= 1e-12, "{worst}");
}

#[test]
fn lambert_reference_values() {
    // Independent high-precision values.
    let cases = [
        (1.0, 0.567_143_290_409_783_873),
        (10.0, 1.745_528_002_740_699_383),
        (-0.3, -0.489_402_227_180_214_933_6),
        (1e6, 11.383_358_086_140_052_62),
    ];
    for (x, w) in cases {
        assert!((lambert_w0(x).unwrap() - w).abs() <= 1e-12 * w.abs().max(1.0), "x = {x}");
    }
    assert!(matches!(lambert_w0(-1.0), Err(Error::OutOfDomain(_))));
}

#[test]
fn lambert_matches_bisection() {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid * mid.exp() < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((lambert_w0(1.0).unwrap() - lo).abs() <= 1e-12);
}

#[test]
fn threshold_without_approximation_is_the_dense_condition() {
    let p = CapacityParams { delta_a: 0.0, memories: 5, m: 2.0, r: 0.7, beta: 0.5, ..base_params() };
    let expected = (2.0 * 4.0 * 2.0 / 0.7f64).ln() / 0.5 + 2.0 * 2.0 * 0.7;
    assert!((well_separation_threshold(&p).unwrap() - expected).abs() <= 1e-12);
}

#[test]
fn threshold_is_monotone_and_diverges() {
    for memories in 2..20 {
        let a = CapacityParams { memories, ..base_params() };
        let b = CapacityParams { memories: memories + 1, ..base_params() };
        assert!(well_separation_threshold(&b).unwrap() > well_separation_threshold(&a).unwrap());
    }
    for k in 0..20 {
        let a = CapacityParams { delta_a: 1e-3 * k as f64, ..base_params() };
        let b = CapacityParams { delta_a: 1e-3 * (k + 1) as f64, ..base_params() };
        assert!(well_separation_threshold(&b).unwrap() > well_separation_threshold(&a).unwrap());
    }
    let edge = 2.0 * 2.0 * 1.0 * 1e-3;
    let near = CapacityParams { r: edge * (1.0 + 1e-12), ..base_params() };
    assert!(well_separation_threshold(&near).unwrap() > 20.0);
    let at = CapacityParams { r: edge, ..base_params() };
    assert!(matches!(well_separation_threshold(&at), Err(Error::InfeasibleStorage { .. })));
}

#[test]
fn well_separation_report() {
    let memory = hadamard_patterns(16, 4, 1.0).unwrap();
    let params = CapacityParams { m: 4.0, beta: 10.0, r: 0.1, delta_a: 0.0, ..base_params() };
    let report = check_well_separated(&memory, &params).unwrap();
    assert!(report.threshold <= 16.0);
    assert!(report.all());
    let dup = ahop_core::PatternMatrix::from_patterns(
        &[vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
        ahop_core::Role::Memory,
    )
    .unwrap();
    let report = check_well_separated(&dup, &CapacityParams { m: 1.0, ..params }).unwrap();
    assert_eq!(report.well_separated[..2], [false, false]);
    let single = hadamard_patterns(4, 1, 1.0).unwrap();
    assert!(matches!(check_well_separated(&single, &params), Err(Error::SingleMemory)));
}

#[test]
fn capacity_bound_matches_high_precision_values() {
    let at9 = capacity_lower_bound(&base_params()).unwrap();
    let at13 = capacity_lower_bound(&CapacityParams { d: 13, ..base_params() }).unwrap();
    assert!((at9.bound - 20.107_211_003_281_153_749).abs() <= 1e-9 * 20.1);
    assert!((at13.bound - 44.615_620_721_979_349_957).abs() <= 1e-9 * 44.6);
    assert!(at13.bound > at9.bound);
    assert!((at9.c * at9.w - at9.b).abs() <= 1e-9 * at9.b);
}

#[test]
fn capacity_bound_as_written_rejects_probabilities() {
    for p in [0.01, 0.5, 0.99, 1.0] {
        let err = capacity_lower_bound(&CapacityParams { p, ..base_params() }).unwrap_err();
        assert!(matches!(err, Error::OutOfDomain(_)), "p = {p}");
    }
}

#[test]
fn single_memory_always_succeeds() {
    let mut exp = CapacityExperiment::new(8, 50, 3);
    exp.beta = 0.125;
    exp.m = 1.0;
    let rows = run_capacity_experiment(&exp, &[1]).unwrap();
    assert_eq!(rows[0].success_rate, 1.0);
}

#[test]
fn four_memories_in_dimension_32() {
    let mut exp = CapacityExperiment::new(32, 200, 0);
    exp.mode = RetrievalMode::Dense;
    let rows = run_capacity_experiment(&exp, &[4]).unwrap();
    assert!(rows[0].success_rate >= 0.95, "{rows:?}");
}

#[test]
fn experiment_is_deterministic_and_order_free() {
    let mut exp = CapacityExperiment::new(16, 40, 9);
    exp.mode = RetrievalMode::Dense;
    let forward = run_capacity_experiment(&exp, &[2, 8, 32]).unwrap();
    let backward = run_capacity_experiment(&exp, &[32, 8, 2]).unwrap();
    assert_eq!(forward[0], backward[2]);
    assert_eq!(forward[2], backward[0]);
    let mut buf = Vec::new();
    write_capacity_csv(&forward, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("d,m,beta,M,trials,success_rate,mean_error,seed\n"));
}
