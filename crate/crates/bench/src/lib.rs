//! Runtime-scaling, error and phase sweeps comparing dense and low-rank
//! Hopfield retrieval.
//!
//! Sweeps run one instance at a time. Each timed measurement is the median of
//! `repeats` runs after one discarded warm-up run.

use std::io::{Read, Write};
use std::time::Instant;

use ahop_core::hopfield::{max_norm_error, retrieve_dense, retrieve_lowrank, RetrievalResult};
use ahop_core::{rng, PatternMatrix, RetrievalConfig, Role};
use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use ahop_core::{Error, Result};

/// Dense runs predicted to exceed this many seconds are skipped.
pub const DEFAULT_DENSE_CAP_SECS: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Scaling,
    Error,
    Phase,
}

/// One output row. Optional fields are empty in CSV when the
/// corresponding path did not run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub kind: Kind,
    pub tau: usize,
    pub d: usize,
    pub g: Option<usize>,
    #[serde(rename = "r")]
    pub rank: Option<usize>,
    #[serde(rename = "B")]
    pub norm_bound: f64,
    pub beta: f64,
    pub delta_a: f64,
    pub wall_time_dense: Option<f64>,
    pub wall_time_lowrank: Option<f64>,
    pub measured_error: Option<f64>,
    #[serde(rename = "bound_2MBdA")]
    pub bound: f64,
    pub seed: u64,
    pub flagged: bool,
    pub note: String,
}

impl ExperimentRecord {
    fn new(kind: Kind, tau: usize, d: usize, norm_bound: f64, beta: f64, delta_a: f64, seed: u64) -> Self {
        Self {
            kind,
            tau,
            d,
            g: None,
            rank: None,
            norm_bound,
            beta,
            delta_a,
            wall_time_dense: None,
            wall_time_lowrank: None,
            measured_error: None,
            bound: 2.0 * tau as f64 * norm_bound * delta_a,
            seed,
            flagged: false,
            note: String::new(),
        }
    }

    fn flag(&mut self, note: impl AsRef<str>) {
        self.flagged = true;
        if !self.note.is_empty() {
            self.note.push_str("; ");
        }
        self.note.push_str(note.as_ref());
    }

    /// Same record with wall times cleared, for byte-stable output.
    pub fn without_timings(&self) -> Self {
        Self {
            wall_time_dense: None,
            wall_time_lowrank: None,
            ..self.clone()
        }
    }
}

pub fn write_records_csv<W: Write>(records: &[ExperimentRecord], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for record in records {
        writer.serialize(record)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_records_csv<R: Read>(input: R) -> Result<Vec<ExperimentRecord>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

/// `count x d` patterns with entries uniform in `[-bound, bound]`, drawn from
/// the stream `(seed, path)`.
pub fn uniform_patterns(count: usize, d: usize, bound: f64, role: Role, seed: u64, path: &[u64]) -> Result<PatternMatrix> {
    let mut rng = rng::stream(seed, path);
    let rows = Array2::from_shape_fn((count, d), |_| rng.gen_range(-bound..=bound));
    PatternMatrix::from_rows(rows, role)
}

fn instance(tau: usize, d: usize, bound: f64, seed: u64) -> Result<(PatternMatrix, PatternMatrix)> {
    Ok((
        uniform_patterns(tau, d, bound, Role::Memory, seed, &[tau as u64, 0])?,
        uniform_patterns(tau, d, bound, Role::Query, seed, &[tau as u64, 1])?,
    ))
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Runs `f` once untimed, then `repeats` timed times. Returns the last
/// result, the median time, and whether every result was bit-identical.
fn timed<F>(repeats: usize, mut f: F) -> Result<(RetrievalResult, f64, bool)>
where
    F: FnMut() -> Result<RetrievalResult>,
{
    let warm = f()?;
    let mut times = Vec::with_capacity(repeats);
    let mut stable = true;
    let mut last = warm;
    for _ in 0..repeats {
        let start = Instant::now();
        let out = f()?;
        times.push(start.elapsed().as_secs_f64());
        stable &= out.z == last.z;
        last = out;
    }
    Ok((last, median(times), stable))
}

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than two
/// distinct points.
pub fn fit_log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = logs.len() as f64;
    if logs.len() < 2 {
        return None;
    }
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub tau_list: Vec<usize>,
    pub d: usize,
    pub beta: f64,
    pub norm_bound: f64,
    pub delta_a: f64,
    pub repeats: usize,
    pub seed: u64,
    pub dense_cap_secs: f64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            tau_list: (10..=14).map(|k| 1 << k).collect(),
            d: 4,
            beta: 0.25,
            norm_bound: 1.0,
            delta_a: 1e-3,
            repeats: 3,
            seed: 0,
            dense_cap_secs: DEFAULT_DENSE_CAP_SECS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub records: Vec<ExperimentRecord>,
    pub dense_slope: Option<f64>,
    pub lowrank_slope: Option<f64>,
}

impl ScalingReport {
    fn points(&self, pick: impl Fn(&ExperimentRecord) -> Option<f64>) -> Vec<(f64, f64)> {
        self.records
            .iter()
            .filter_map(|r| pick(r).map(|t| (r.tau as f64, t)))
            .collect()
    }

    /// Recomputes both slopes from (possibly re-read) records.
    pub fn refit(records: Vec<ExperimentRecord>) -> Self {
        let mut report = Self {
            records,
            dense_slope: None,
            lowrank_slope: None,
        };
        report.dense_slope = fit_log_log_slope(&report.points(|r| r.wall_time_dense));
        report.lowrank_slope = fit_log_log_slope(&report.points(|r| r.wall_time_lowrank));
        report
    }
}

/// Times dense and low-rank retrieval on `M = L = tau` instances with
/// entries uniform in `[-B, B]` and fits log-log slopes. The measured error
/// is recorded wherever the dense path ran.
pub fn runtime_scaling(cfg: &ScalingConfig) -> Result<ScalingReport> {
    if cfg.repeats < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 repeats, got {}", cfg.repeats)));
    }
    if cfg.tau_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("tau values must be strictly increasing".into()));
    }
    let retrieval = RetrievalConfig::new(cfg.beta, cfg.delta_a)?;
    let mut records = Vec::with_capacity(cfg.tau_list.len());
    let mut last_dense: Option<(usize, f64)> = None;
    for &tau in &cfg.tau_list {
        let (memory, queries) = instance(tau, cfg.d, cfg.norm_bound, cfg.seed)?;
        let b = memory.max_norm().max(queries.max_norm());
        let mut record = ExperimentRecord::new(Kind::Scaling, tau, cfg.d, b, cfg.beta, cfg.delta_a, cfg.seed);

        let (lowrank, t_low, stable) = timed(cfg.repeats, || retrieve_lowrank(&memory, &queries, &retrieval))?;
        record.g = Some(lowrank.degree_used);
        record.rank = Some(lowrank.rank_used);
        record.wall_time_lowrank = Some(t_low);
        if !stable {
            record.flag("low-rank output differs across repeats");
        }

        let predicted = last_dense.map(|(prev, t)| t * (tau as f64 / prev as f64).powi(2));
        if predicted.is_some_and(|p| p * (cfg.repeats + 1) as f64 > cfg.dense_cap_secs) {
            record.flag(format!("dense skipped: predicted {:.1} s per run", predicted.unwrap_or(0.0)));
        } else {
            let (dense, t_dense, stable) = timed(cfg.repeats, || retrieve_dense(&memory, &queries, &retrieval))?;
            record.wall_time_dense = Some(t_dense);
            last_dense = Some((tau, t_dense));
            if !stable {
                record.flag("dense output differs across repeats");
            }
            let err = max_norm_error(lowrank.z.view(), dense.z.view())?;
            record.measured_error = Some(err);
            if err > record.bound {
                record.flag("measured error exceeds 2MB delta_a");
            }
        }
        records.push(record);
    }
    Ok(ScalingReport::refit(records))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSweepConfig {
    pub delta_a_list: Vec<f64>,
    pub d: usize,
    pub memories: usize,
    pub queries: usize,
    pub norm_bound: f64,
    pub beta: f64,
    pub seed: u64,
}

impl Default for ErrorSweepConfig {
    fn default() -> Self {
        Self {
            delta_a_list: vec![1e-2, 5e-3, 1e-3, 5e-4, 1e-4],
            d: 4,
            memories: 256,
            queries: 256,
            norm_bound: 1.0,
            beta: 0.25,
            seed: 0,
        }
    }
}

/// Measures `||Z_lowrank - Z_dense||_max` on one fixed instance for each
/// `delta_a`. A record is flagged when it exceeds its bound, or when its
/// error grew although `delta_a` shrank relative to the previous entry.
pub fn error_sweep(cfg: &ErrorSweepConfig) -> Result<Vec<ExperimentRecord>> {
    let memory = uniform_patterns(cfg.memories, cfg.d, cfg.norm_bound, Role::Memory, cfg.seed, &[0])?;
    let queries = uniform_patterns(cfg.queries, cfg.d, cfg.norm_bound, Role::Query, cfg.seed, &[1])?;
    let b = memory.max_norm().max(queries.max_norm());
    let dense = retrieve_dense(&memory, &queries, &RetrievalConfig::new(cfg.beta, 1e-3)?)?;
    let tau = cfg.memories.max(cfg.queries);
    let mut records: Vec<ExperimentRecord> = Vec::with_capacity(cfg.delta_a_list.len());
    for &delta_a in &cfg.delta_a_list {
        let retrieval = RetrievalConfig::new(cfg.beta, delta_a)?;
        let lowrank = retrieve_lowrank(&memory, &queries, &retrieval)?;
        let err = max_norm_error(lowrank.z.view(), dense.z.view())?;
        let mut record = ExperimentRecord::new(Kind::Error, tau, cfg.d, b, cfg.beta, delta_a, cfg.seed);
        record.bound = lowrank.error_bound;
        record.g = Some(lowrank.degree_used);
        record.rank = Some(lowrank.rank_used);
        record.wall_time_dense = Some(dense.wall_time);
        record.wall_time_lowrank = Some(lowrank.wall_time);
        record.measured_error = Some(err);
        if err > record.bound {
            record.flag("measured error exceeds 2MB delta_a");
        }
        if let Some(prev) = records.last() {
            if delta_a < prev.delta_a && prev.measured_error.is_some_and(|e| err > e) {
                record.flag("error increased as delta_a decreased");
            }
        }
        records.push(record);
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSweepConfig {
    pub b_list: Vec<f64>,
    pub tau: usize,
    pub d: usize,
    pub beta: f64,
    pub delta_a: f64,
    pub degree_cap: usize,
    pub rank_cap: usize,
    pub seed: u64,
}

impl Default for PhaseSweepConfig {
    fn default() -> Self {
        Self {
            b_list: vec![0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0],
            tau: 1024,
            d: 4,
            beta: 0.25,
            delta_a: 1e-3,
            degree_cap: 32,
            rank_cap: 1_000_000,
            seed: 0,
        }
    }
}

/// Attempts low-rank retrieval for growing entry bounds `B` under fixed
/// degree and rank caps. Failures are recorded in the note, not raised.
/// Records whose rank exceeds `sqrt(tau)` are flagged.
pub fn phase_sweep(cfg: &PhaseSweepConfig) -> Result<Vec<ExperimentRecord>> {
    let retrieval = RetrievalConfig::new(cfg.beta, cfg.delta_a)?
        .with_max_degree(cfg.degree_cap)
        .with_rank_cap(cfg.rank_cap);
    let rank_budget = (cfg.tau as f64).sqrt();
    let mut records = Vec::with_capacity(cfg.b_list.len());
    for (k, &bound) in cfg.b_list.iter().enumerate() {
        let memory = uniform_patterns(cfg.tau, cfg.d, bound, Role::Memory, cfg.seed, &[k as u64, 0])?;
        let queries = uniform_patterns(cfg.tau, cfg.d, bound, Role::Query, cfg.seed, &[k as u64, 1])?;
        let mut record = ExperimentRecord::new(Kind::Phase, cfg.tau, cfg.d, bound, cfg.beta, cfg.delta_a, cfg.seed);
        match retrieve_lowrank(&memory, &queries, &retrieval) {
            Ok(lowrank) => {
                record.g = Some(lowrank.degree_used);
                record.rank = Some(lowrank.rank_used);
                record.wall_time_lowrank = Some(lowrank.wall_time);
                let dense = retrieve_dense(&memory, &queries, &retrieval)?;
                record.wall_time_dense = Some(dense.wall_time);
                record.measured_error = Some(max_norm_error(lowrank.z.view(), dense.z.view())?);
                if lowrank.rank_used as f64 > rank_budget {
                    record.flag(format!("rank {} above sqrt(tau) = {:.0}", lowrank.rank_used, rank_budget));
                }
            }
            Err(err @ (Error::DegreeExhausted { .. } | Error::SizeOverflow { .. } | Error::NonPositiveNormalizer { .. })) => {
                record.flag(format!("{}: {err}", err.name()));
            }
            Err(err) => return Err(err),
        }
        records.push(record);
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Machine {
    pub cpu_model: String,
    pub cores: usize,
}

pub fn machine() -> Machine {
    let cpu_model = std::fs::read_to_string("/proc/cpuinfo")
        .ok()
        .and_then(|info| {
            info.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split(':').nth(1))
                .map(|s| s.trim().to_string())
        })
        .unwrap_or_else(|| std::env::consts::ARCH.to_string());
    Machine {
        cpu_model,
        cores: std::thread::available_parallelism().map_or(1, |n| n.get()),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub machine: Machine,
    pub dense_slope: Option<f64>,
    pub lowrank_slope: Option<f64>,
    pub records: usize,
    pub flagged: usize,
}

pub fn summarize(records: &[ExperimentRecord]) -> Summary {
    let report = ScalingReport::refit(records.to_vec());
    Summary {
        machine: machine(),
        dense_slope: report.dense_slope,
        lowrank_slope: report.lowrank_slope,
        records: records.len(),
        flagged: records.iter().filter(|r| r.flagged).count(),
    }
}
