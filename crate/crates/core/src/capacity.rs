//! Memory capacity: the principal Lambert W branch, the well-separation
//! condition, the formal capacity lower bound and an empirical
//! store-then-retrieve experiment.

use std::f64::consts::E;

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hopfield::{pattern_radius, retrieve, separation, RetrievalConfig, RetrievalMode};
use crate::pattern::{PatternMatrix, Role};
use crate::rng;

const HALLEY_MAX_ITER: usize = 64;

/// `W_0(x)`, the solution of `w e^w = x` with `w >= -1`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    let branch_point = -1.0 / E;
    if x.is_nan() || x < branch_point {
        return Err(Error::OutOfDomain(format!("W0 is defined for x >= -1/e, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    if x > 1e300 {
        return lambert_w0_exp(x.ln());
    }
    let mut w = if x >= 0.0 {
        x.ln_1p()
    } else {
        // Series about the branch point in p = sqrt(2 (e x + 1)).
        let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    };
    if w == -1.0 {
        return Ok(w);
    }
    for _ in 0..HALLEY_MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        let next = w - step;
        if !next.is_finite() {
            break;
        }
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * next.abs().max(1e-300);
        w = next;
        if done {
            break;
        }
    }
    Ok(w)
}

/// `W_0(e^s)`, usable where `e^s` overflows. Solves `w + ln w = s` by Newton.
pub fn lambert_w0_exp(s: f64) -> Result<f64> {
    if s.is_nan() {
        return Err(Error::OutOfDomain("W0(exp(s)) needs a finite s".into()));
    }
    if s < 1.0 {
        return lambert_w0(s.exp());
    }
    let mut w = s - s.ln();
    for _ in 0..HALLEY_MAX_ITER {
        let next = w - (w + w.ln() - s) * w / (w + 1.0);
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * next.abs();
        w = next;
        if done {
            break;
        }
    }
    Ok(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityParams {
    pub p: f64,
    pub d: usize,
    /// Sphere radius of the stored patterns.
    pub m: f64,
    pub beta: f64,
    /// Radius of the retrieval sphere around each memory.
    pub r: f64,
    pub memories: usize,
    pub norm_bound: f64,
    pub delta_a: f64,
}

impl CapacityParams {
    /// `2 M B delta_a`, the approximation part of the retrieval error.
    pub fn delta_h(&self) -> f64 {
        2.0 * self.memories as f64 * self.norm_bound * self.delta_a
    }

    /// `R - 2 M B delta_a`.
    pub fn storage_margin(&self) -> Result<f64> {
        let margin = self.r - self.delta_h();
        if !(margin > 0.0) {
            return Err(Error::InfeasibleStorage {
                radius: self.r,
                delta_h: self.delta_h(),
            });
        }
        Ok(margin)
    }

    fn check_positive(&self) -> Result<()> {
        let named = [
            ("m", self.m),
            ("beta", self.beta),
            ("R", self.r),
            ("B", self.norm_bound),
        ];
        for (name, v) in named {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.delta_a >= 0.0) {
            return Err(Error::InvalidParams(format!("delta_a must be non-negative, got {}", self.delta_a)));
        }
        Ok(())
    }
}

/// `(1/beta) ln(2 (M-1) m / (R - 2 M B delta_a)) + 2 m R`.
pub fn well_separation_threshold(params: &CapacityParams) -> Result<f64> {
    params.check_positive()?;
    if params.memories < 2 {
        return Err(Error::SingleMemory);
    }
    let margin = params.storage_margin()?;
    let k = (params.memories - 1) as f64;
    Ok((2.0 * k * params.m / margin).ln() / params.beta + 2.0 * params.m * params.r)
}

#[derive(Debug, Clone, Serialize)]
pub struct SeparationReport {
    pub threshold: f64,
    pub separations: Vec<f64>,
    pub well_separated: Vec<bool>,
}

impl SeparationReport {
    pub fn all(&self) -> bool {
        self.well_separated.iter().all(|&ok| ok)
    }
}

pub fn check_well_separated(memory: &PatternMatrix, params: &CapacityParams) -> Result<SeparationReport> {
    if memory.len() < 2 {
        return Err(Error::SingleMemory);
    }
    let params = CapacityParams {
        memories: memory.len(),
        ..*params
    };
    let threshold = well_separation_threshold(&params)?;
    let separations = (0..memory.len())
        .map(|mu| separation(memory, mu))
        .collect::<Result<Vec<_>>>()?;
    let well_separated = separations.iter().map(|&s| s >= threshold).collect();
    Ok(SeparationReport {
        threshold,
        separations,
        well_separated,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityBound {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// `W_0(exp(a + ln b))`.
    pub w: f64,
    /// `sqrt(p) C^((d-1)/4)`.
    pub bound: f64,
}

/// `sqrt(p) C^((d-1)/4)` with `C = b / W_0(exp(a + ln b))`,
/// `a = 4/(d-1) (ln[2 m (sqrt(p) - 1) / (R - 2 M B delta_a)] + 1)` and
/// `b = 4 m^2 beta / (5 (d-1))`.
///
/// The logarithm's argument is evaluated as written; it is non-positive
/// for every `p <= 1`, which is reported as `OutOfDomain`.
pub fn capacity_lower_bound(params: &CapacityParams) -> Result<CapacityBound> {
    params.check_positive()?;
    if params.d < 2 {
        return Err(Error::InvalidParams(format!("need d >= 2, got {}", params.d)));
    }
    if !(params.p > 0.0) {
        return Err(Error::InvalidParams(format!("p must be positive, got {}", params.p)));
    }
    let margin = params.storage_margin()?;
    let dm1 = (params.d - 1) as f64;
    let root_p = params.p.sqrt();
    let arg = 2.0 * params.m * (root_p - 1.0) / margin;
    if !(arg > 0.0) {
        return Err(Error::OutOfDomain(format!(
            "log argument 2m(sqrt(p) - 1)/(R - 2MB delta_a) = {arg} is not positive (p = {})",
            params.p
        )));
    }
    let a = 4.0 / dm1 * (arg.ln() + 1.0);
    let b = 4.0 * params.m * params.m * params.beta / (5.0 * dm1);
    if !(b > 0.0) {
        return Err(Error::OutOfDomain(format!("b = {b} is not positive")));
    }
    let w = lambert_w0_exp(a + b.ln())?;
    let c = b / w;
    Ok(CapacityBound {
        a,
        b,
        c,
        w,
        bound: root_p * c.powf(dm1 / 4.0),
    })
}

/// `count` points drawn uniformly from the radius-`m` sphere in `R^d`.
pub fn sample_sphere<R: Rng>(rng: &mut R, count: usize, d: usize, m: f64) -> Array2<f64> {
    let mut out = Array2::zeros((count, d));
    for mut row in out.rows_mut() {
        loop {
            row.mapv_inplace(|_| rng.sample::<f64, _>(StandardNormal));
            let norm = row.dot(&row).sqrt();
            if norm > 0.0 {
                row.mapv_inplace(|v| v * m / norm);
                break;
            }
        }
    }
    out
}

fn random_unit<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    let row = sample_sphere(rng, 1, d, 1.0);
    row.into_raw_vec()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityExperiment {
    pub d: usize,
    pub m: f64,
    pub beta: f64,
    pub trials: usize,
    /// Query offset as a fraction of `R`.
    pub perturbation: f64,
    /// Success radius; `None` means `R / 2`.
    pub eps: Option<f64>,
    pub delta_a: f64,
    pub mode: RetrievalMode,
    pub seed: u64,
}

impl CapacityExperiment {
    pub fn new(d: usize, trials: usize, seed: u64) -> Self {
        Self {
            d,
            m: (d as f64).sqrt(),
            beta: 1.0,
            trials,
            perturbation: 0.1,
            eps: None,
            delta_a: 1e-3,
            mode: RetrievalMode::LowRank,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidParams("d must be at least 1".into()));
        }
        if !(self.m > 0.0 && self.beta > 0.0) {
            return Err(Error::InvalidParams("m and beta must be positive".into()));
        }
        if !(self.perturbation > 0.0 && self.perturbation < 1.0) {
            return Err(Error::InvalidParams(format!(
                "perturbation must lie in (0, 1), got {}",
                self.perturbation
            )));
        }
        if let Some(eps) = self.eps {
            if !(eps > 0.0) {
                return Err(Error::InvalidParams(format!("eps must be positive, got {eps}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityRow {
    pub d: usize,
    pub m: f64,
    pub beta: f64,
    #[serde(rename = "M")]
    pub memories: usize,
    pub trials: usize,
    pub success_rate: f64,
    pub mean_error: f64,
    pub seed: u64,
}

/// One trial: the retrieved index (nearest stored pattern to `T(x)`), the
/// Euclidean error to the target, and the error bound at this query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub target: usize,
    pub retrieved: usize,
    pub error: f64,
    pub max_error: f64,
    pub bound: f64,
    pub success: bool,
}

/// Stored patterns for `memories`, reproducible from `(seed, memories)`.
pub fn capacity_memory(exp: &CapacityExperiment, memories: usize) -> Result<PatternMatrix> {
    let mut rng = rng::stream(exp.seed, &[memories as u64, u64::MAX]);
    PatternMatrix::from_rows(sample_sphere(&mut rng, memories, exp.d, exp.m), Role::Memory)
}

/// Runs `trials` one-step retrievals against `memory`. Trial `k` draws its
/// target and noise from the stream `(seed, M, k)`.
pub fn run_trials(exp: &CapacityExperiment, memory: &PatternMatrix) -> Result<Vec<TrialOutcome>> {
    exp.validate()?;
    let count = memory.len();
    let d = memory.dim();
    let radius = if count > 1 { pattern_radius(memory)? } else { exp.m };
    let offset = exp.perturbation * radius;
    let mut targets = Vec::with_capacity(exp.trials);
    let mut queries = Vec::with_capacity(exp.trials * d);
    for trial in 0..exp.trials {
        let mut rng = rng::stream(exp.seed, &[count as u64, trial as u64]);
        let mu = rng.gen_range(0..count);
        let noise = random_unit(&mut rng, d);
        targets.push(mu);
        queries.extend(memory.pattern(mu).iter().zip(&noise).map(|(x, u)| x + offset * u));
    }
    if targets.is_empty() {
        return Ok(Vec::new());
    }
    let queries = PatternMatrix::from_rows(
        Array2::from_shape_vec((exp.trials, d), queries).expect("trials x d entries"),
        Role::Query,
    )?;
    let cfg = RetrievalConfig::new(exp.beta, exp.delta_a)?;
    let result = retrieve(memory, &queries, &cfg, exp.mode)?;
    let margin = match exp.mode {
        RetrievalMode::Dense => 0.0,
        RetrievalMode::LowRank => result.error_bound,
    };
    let eps = exp.eps.unwrap_or(radius / 2.0) + margin;
    let norm_bound = memory.max_norm().max(queries.max_norm());
    let delta_a = match exp.mode {
        RetrievalMode::Dense => 0.0,
        RetrievalMode::LowRank => exp.delta_a,
    };
    (0..exp.trials)
        .into_par_iter()
        .map(|k| {
            let mu = targets[k];
            let out = result.column(k);
            let (retrieved, _) = memory
                .patterns()
                .map(|p| sq_dist(p, &out))
                .enumerate()
                .fold((0, f64::INFINITY), |best, (i, dist)| if dist < best.1 { (i, dist) } else { best });
            let target = memory.pattern(mu);
            let error = sq_dist(target, &out).sqrt();
            let max_error = target.iter().zip(&out).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let bound = crate::hopfield::retrieval_error_bound(
                memory,
                queries.pattern(k),
                mu,
                exp.beta,
                norm_bound,
                delta_a,
            )?;
            Ok(TrialOutcome {
                target: mu,
                retrieved,
                error,
                max_error,
                bound,
                success: error <= eps && retrieved == mu,
            })
        })
        .collect()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// One row per entry of `memory_counts`; an empty table when `trials == 0`.
pub fn run_capacity_experiment(exp: &CapacityExperiment, memory_counts: &[usize]) -> Result<Vec<CapacityRow>> {
    exp.validate()?;
    if exp.trials == 0 {
        return Ok(Vec::new());
    }
    memory_counts
        .iter()
        .map(|&count| {
            if count == 0 {
                return Err(Error::InvalidParams("memory counts must be positive".into()));
            }
            let memory = capacity_memory(exp, count)?;
            let outcomes = run_trials(exp, &memory)?;
            let n = outcomes.len() as f64;
            Ok(CapacityRow {
                d: exp.d,
                m: exp.m,
                beta: exp.beta,
                memories: count,
                trials: exp.trials,
                success_rate: outcomes.iter().filter(|o| o.success).count() as f64 / n,
                mean_error: outcomes.iter().map(|o| o.error).sum::<f64>() / n,
                seed: exp.seed,
            })
        })
        .collect()
}

/// Largest `M` whose success rate reaches `min_rate`.
pub fn empirical_capacity(rows: &[CapacityRow], min_rate: f64) -> Option<usize> {
    rows.iter()
        .filter(|r| r.success_rate >= min_rate)
        .map(|r| r.memories)
        .max()
}

pub fn write_capacity_csv<W: std::io::Write>(rows: &[CapacityRow], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

/// `d x d` Sylvester-Hadamard matrix (`d` a power of two) with rows scaled by
/// `scale`: mutually orthogonal patterns of norm `scale sqrt(d)`.
pub fn hadamard_patterns(d: usize, count: usize, scale: f64) -> Result<PatternMatrix> {
    if !d.is_power_of_two() || count > d || count == 0 {
        return Err(Error::InvalidParams(format!(
            "need d a power of two and 1 <= count <= d, got d = {d}, count = {count}"
        )));
    }
    let rows = Array2::from_shape_fn((count, d), |(i, j)| {
        if (i & j).count_ones() % 2 == 0 {
            scale
        } else {
            -scale
        }
    });
    PatternMatrix::from_rows(rows, Role::Memory)
}
