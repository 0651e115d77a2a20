//! The `verify` property suite: quick, seeded versions of every module's
//! invariants. The report holds no timings, so equal seeds give identical
//! bytes.

use ahop_bench::{error_sweep, uniform_patterns, ErrorSweepConfig};
use ahop_core::capacity::{lambert_w0, well_separation_threshold, CapacityParams};
use ahop_core::feature_map::MonomialFeatureMap;
use ahop_core::hopfield::{
    dense_weights, fixed_point_iterate, lowrank_factors, max_norm_error, retrieve_dense, retrieve_lowrank,
};
use ahop_core::poly_approx::{fit_exp_poly, Polynomial, DEFAULT_MAX_DEGREE};
use ahop_core::reduction::{even_dimension, verify_reduction, ReductionExperiment};
use ahop_core::{rng, Normalization, PatternMatrix, RetrievalConfig, RetrievalMode, Role};
use ndarray::{Array2, Axis};
use rand::Rng;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyCheck {
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub value: f64,
    /// The value must not exceed this.
    pub limit: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<VerifyCheck>,
}

fn check(name: &str, value: f64, limit: f64, detail: String) -> VerifyCheck {
    VerifyCheck {
        name: name.to_string(),
        passed: value <= limit,
        value,
        limit,
        detail,
    }
}

fn random_case(seed: u64, k: u64) -> ahop_core::Result<(PatternMatrix, PatternMatrix, f64)> {
    let mut r = rng::stream(seed, &[k, 0]);
    let d = r.gen_range(1..=8);
    let m = r.gen_range(1..=64);
    let l = r.gen_range(1..=64);
    let b = r.gen_range(0.1..=2.0);
    Ok((
        uniform_patterns(m, d, b, Role::Memory, seed, &[k, 1])?,
        uniform_patterns(l, d, b, Role::Query, seed, &[k, 2])?,
        1.0 / d as f64,
    ))
}

fn factorization(seed: u64) -> ahop_core::Result<VerifyCheck> {
    let mut worst = 0.0f64;
    for k in 0..60u64 {
        let mut r = rng::stream(seed, &[1, k]);
        let d = r.gen_range(1..=6);
        let g = r.gen_range(0..=6);
        let poly = Polynomial::new((0..=g).map(|_| r.gen_range(-1.0..1.0)).collect::<Vec<f64>>());
        let map = MonomialFeatureMap::new(&poly, d)?;
        let x = Array2::from_shape_fn((r.gen_range(1..=16), d), |_| r.gen_range(-1.0..1.0));
        let y = Array2::from_shape_fn((r.gen_range(1..=16), d), |_| r.gen_range(-1.0..1.0));
        let (u1, u2) = map.factor_matrices(x.view(), y.view())?;
        let dense = x.dot(&y.t()).mapv(|s| poly.eval(s));
        let scale = 1.0 + dense.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        worst = worst.max(max_norm_error(u1.dot(&u2.t()).view(), dense.view())? / scale);
    }
    Ok(check("factorization_exactness", worst, 1e-9, "max |U1 U2^T - P(X Y^T)| / (1 + max|P|)".into()))
}

fn exp_contract(seed: u64) -> ahop_core::Result<VerifyCheck> {
    let mut worst = 0.0f64;
    let mut r = rng::stream(seed, &[2]);
    for bound in [0.5, 1.0, 2.0, 3.0] {
        for delta in [1e-2, 1e-3, 1e-4] {
            let p = fit_exp_poly(bound, delta, DEFAULT_MAX_DEGREE)?;
            for _ in 0..5_000 {
                let x: f64 = r.gen_range(-bound..=bound);
                worst = worst.max((p.eval(x) - x.exp()).abs() / (delta * x.exp()));
            }
        }
    }
    Ok(check("exp_relative_contract", worst, 1.05, "max |P(x) - e^x| / (delta_a e^x)".into()))
}

fn error_law(seed: u64) -> ahop_core::Result<[VerifyCheck; 2]> {
    let mut worst_z = 0.0f64;
    let mut worst_d = 0.0f64;
    for k in 0..30 {
        let (memory, queries, beta) = random_case(seed, k)?;
        let cfg = RetrievalConfig::new(beta, 1e-3)?;
        for normalization in [Normalization::QueryNormalized, Normalization::MemoryNormalized] {
            let cfg = cfg.with_normalization(normalization);
            let approx = retrieve_lowrank(&memory, &queries, &cfg)?;
            let exact = retrieve_dense(&memory, &queries, &cfg)?;
            worst_z = worst_z.max(max_norm_error(approx.z.view(), exact.z.view())? / approx.error_bound);
        }
        let approx_d = lowrank_factors(&memory, &queries, &cfg)?.row_sums();
        let exact_d = (memory.rows().dot(&queries.rows().t()) * beta).mapv(f64::exp).sum_axis(Axis(1));
        for (a, e) in approx_d.iter().zip(&exact_d) {
            worst_d = worst_d.max((a - e).abs() / (cfg.delta_a * e));
        }
    }
    Ok([
        check("lowrank_error_law", worst_z, 1.0, "max ||Z~ - Z||_max / (2 M B delta_a)".into()),
        check("row_normalizer_contract", worst_d, 1.0, "max |D~ - D| / (delta_a D)".into()),
    ])
}

fn softmax_columns(seed: u64) -> ahop_core::Result<VerifyCheck> {
    let mut worst = 0.0f64;
    for k in 0..10 {
        let (memory, queries, beta) = random_case(seed, 100 + k)?;
        let w = dense_weights(&memory, &queries, beta, Normalization::QueryNormalized)?;
        for col in w.columns() {
            worst = worst.max((col.sum() - 1.0).abs());
        }
    }
    Ok(check("softmax_columns_sum_to_one", worst, 1e-12, "max |sum_mu w - 1|".into()))
}

fn energy_descent(seed: u64) -> ahop_core::Result<VerifyCheck> {
    let mut worst = f64::NEG_INFINITY;
    for k in 0..10 {
        let (memory, _, _) = random_case(seed, 200 + k)?;
        let mut r = rng::stream(seed, &[3, k]);
        let x0: Vec<f64> = (0..memory.dim()).map(|_| r.gen_range(-1.0..1.0)).collect();
        let cfg = RetrievalConfig::new(2.0, 1e-3)?;
        let trace = fixed_point_iterate(&memory, &x0, &cfg, RetrievalMode::Dense, 8, 1e-9)?;
        for w in trace.energies.windows(2) {
            worst = worst.max(w[1] - w[0]);
        }
    }
    Ok(check("dense_energy_descent", worst, 1e-9, "max E(x_{k+1}) - E(x_k)".into()))
}

fn reduction(seed: u64) -> ahop_core::Result<VerifyCheck> {
    let exp = ReductionExperiment::new(8, even_dimension(8, 8.0), 6, seed);
    let report = verify_reduction(&exp)?;
    let disagree = (report.promised_queries - report.agreeing_queries) as f64;
    let violations = report.trials.iter().filter(|t| t.promise_violation.is_some()).count();
    Ok(check(
        "reduction_agreement",
        disagree + violations as f64,
        0.0,
        format!(
            "{}/{} promised queries agree, {violations} promise violations",
            report.agreeing_queries, report.promised_queries
        ),
    ))
}

fn lambert(_seed: u64) -> ahop_core::Result<VerifyCheck> {
    let lo = -1.0 / std::f64::consts::E + 1e-9;
    let mut worst = 0.0f64;
    for k in 0..2_000 {
        let x = if k < 400 {
            lo * (1.0 - k as f64 / 400.0)
        } else {
            10f64.powf(-9.0 + 15.0 * (k - 400) as f64 / 1_599.0)
        };
        let w = lambert_w0(x)?;
        worst = worst.max((w * w.exp() - x).abs() / x.abs().max(1.0));
    }
    Ok(check("lambert_w_residual", worst, 1e-12, "max |W e^W - x| / max(1, |x|)".into()))
}

fn separation_monotone(_seed: u64) -> ahop_core::Result<VerifyCheck> {
    let base = CapacityParams {
        p: 0.5,
        d: 16,
        m: 4.0,
        beta: 1.0,
        r: 1.0,
        memories: 2,
        norm_bound: 1.0,
        delta_a: 1e-3,
    };
    let mut violations = 0usize;
    for memories in 2..40 {
        let a = well_separation_threshold(&CapacityParams { memories, ..base })?;
        let b = well_separation_threshold(&CapacityParams { memories: memories + 1, ..base })?;
        violations += (b <= a) as usize;
    }
    for k in 0..10 {
        let a = well_separation_threshold(&CapacityParams { delta_a: 1e-3 * k as f64, ..base })?;
        let b = well_separation_threshold(&CapacityParams { delta_a: 1e-3 * (k + 1) as f64, ..base })?;
        violations += (b <= a) as usize;
    }
    Ok(check("separation_threshold_monotone", violations as f64, 0.0, "non-increasing steps".into()))
}

fn error_sweep_linear(seed: u64) -> ahop_core::Result<VerifyCheck> {
    let records = error_sweep(&ErrorSweepConfig {
        delta_a_list: vec![2e-3, 1e-3],
        memories: 64,
        queries: 64,
        seed,
        ..ErrorSweepConfig::default()
    })?;
    let ratio = records[0].bound / records[1].bound;
    let flagged = records.iter().filter(|r| r.flagged).count() as f64;
    Ok(check(
        "error_sweep_bound",
        flagged + (ratio - 2.0).abs(),
        1e-12,
        format!("bound ratio {ratio}, {flagged} flagged records"),
    ))
}

pub fn run_verify(seed: u64) -> ahop_core::Result<VerifyReport> {
    let mut checks = vec![factorization(seed)?, exp_contract(seed)?];
    checks.extend(error_law(seed)?);
    checks.push(softmax_columns(seed)?);
    checks.push(energy_descent(seed)?);
    checks.push(reduction(seed)?);
    checks.push(lambert(seed)?);
    checks.push(separation_monotone(seed)?);
    checks.push(error_sweep_linear(seed)?);
    Ok(VerifyReport {
        seed,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}
