//! Gap approximate nearest-neighbour search decided through one Hopfield
//! retrieval.
//!
//! Given binary sets `A = {a_i}` and `B = {b_j}` in `{0,1}^d`, the memories
//! and queries are the `2d x 2n` matrices
//!
//! ```text
//! Xi = B * [ a_1 .. a_n   0 .. 0 ]      X = B * [ b_1 .. b_n   0 .. 0 ]
//!          [ 1   .. 1     1 .. 1 ]              [ 0   .. 0     1 .. 1 ]
//! ```
//!
//! with `beta = 1/(2d)` and `B = C_beta sqrt(ln n)`. After memory-normalized
//! retrieval, the last output row (divided by `B`, i.e. read against the
//! all-ones row) at query `j <= n` is `sum_i A_ij / D_ii`, which is at least
//! `2 t~` when some `a_i` is within squared distance `t` of `b_j` and below
//! `2 t~` when every `a_i` is beyond `(1 + delta) t` (balanced rows assumed).
//!
//! The exponents involved reach several hundred, so the dense decision is
//! evaluated in log space.

use std::collections::HashSet;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hopfield::{lowrank_factors, Normalization, RetrievalConfig, RetrievalMode};
use crate::pattern::{PatternMatrix, Role};
use crate::rng;

/// Default gap parameter.
pub const DEFAULT_DELTA: f64 = 0.09;
/// Default cap on `n * |Hamming ball|` for the enumeration path.
pub const DEFAULT_ENUMERATION_CAP: u128 = 50_000_000;
/// Slack factor applied to the lower limit on `C_beta`.
pub const C_BETA_SLACK: f64 = 2.1;
/// Additive slack above the lower limit on `C_alpha`.
pub const C_ALPHA_SLACK: f64 = 1.1;

/// Two equally sized sets of binary vectors plus the gap parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnsInstance {
    a: Array2<u8>,
    b: Array2<u8>,
    t: f64,
    delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnsMeta {
    pub n: usize,
    pub d: usize,
    pub t: f64,
    pub delta: f64,
}

impl AnnsInstance {
    pub fn new(a: Array2<u8>, b: Array2<u8>, t: f64, delta: f64) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::InvalidArgument(format!(
                "set shapes differ: {:?} vs {:?}",
                a.dim(),
                b.dim()
            )));
        }
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(Error::InvalidArgument("sets must be non-empty with d >= 1".into()));
        }
        if a.iter().chain(b.iter()).any(|&v| v > 1) {
            return Err(Error::InvalidArgument("entries must be 0 or 1".into()));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument(format!("threshold t must be positive, got {t}")));
        }
        if !(delta > 0.0 && delta < 0.1) {
            return Err(Error::InvalidArgument(format!("gap delta must lie in (0, 0.1), got {delta}")));
        }
        Ok(Self {
            a: a.as_standard_layout().into_owned(),
            b: b.as_standard_layout().into_owned(),
            t,
            delta,
        })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn d(&self) -> usize {
        self.a.ncols()
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn set_a(&self) -> &Array2<u8> {
        &self.a
    }

    pub fn set_b(&self) -> &Array2<u8> {
        &self.b
    }

    pub fn a_row(&self, i: usize) -> &[u8] {
        self.a.row(i).to_slice().expect("standard layout")
    }

    pub fn b_row(&self, j: usize) -> &[u8] {
        self.b.row(j).to_slice().expect("standard layout")
    }

    pub fn meta(&self) -> AnnsMeta {
        AnnsMeta {
            n: self.n(),
            d: self.d(),
            t: self.t,
            delta: self.delta,
        }
    }

    /// Every row of both sets has exactly `d/2` ones.
    pub fn is_balanced(&self) -> bool {
        let d = self.d();
        d % 2 == 0
            && self
                .a
                .rows()
                .into_iter()
                .chain(self.b.rows())
                .all(|r| r.iter().map(|&v| v as usize).sum::<usize>() == d / 2)
    }

    /// Squared Euclidean (= Hamming) distance between `a_i` and `b_j`.
    pub fn sq_dist(&self, i: usize, j: usize) -> usize {
        hamming(self.a_row(i), self.b_row(j))
    }

    pub fn write_set_csv<W: std::io::Write>(set: &Array2<u8>, mut out: W) -> Result<()> {
        for row in set.rows() {
            let line: Vec<String> = row.iter().map(u8::to_string).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn read_set_csv<R: std::io::BufRead>(input: R, d: usize) -> Result<Array2<u8>> {
        let mut flat = Vec::new();
        let mut rows = 0;
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let values: Vec<u8> = line
                .split(',')
                .map(|t| t.trim().parse::<u8>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 1)))?;
            if values.len() != d {
                return Err(Error::Format(format!(
                    "line {}: expected {d} entries, found {}",
                    lineno + 1,
                    values.len()
                )));
            }
            flat.extend(values);
            rows += 1;
        }
        Array2::from_shape_vec((rows, d), flat).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_parts(a: Array2<u8>, b: Array2<u8>, meta: AnnsMeta) -> Result<Self> {
        if a.nrows() != meta.n || a.ncols() != meta.d {
            return Err(Error::Format(format!(
                "set A is {:?}, sidecar says {} x {}",
                a.dim(),
                meta.n,
                meta.d
            )));
        }
        Self::new(a, b, meta.t, meta.delta)
    }
}

fn hamming(x: &[u8], y: &[u8]) -> usize {
    x.iter().zip(y).filter(|(a, b)| a != b).count()
}

/// Exact closest pair, ties broken by smallest `i` then smallest `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClosestPair {
    pub i: usize,
    pub j: usize,
    pub sq_dist: usize,
}

pub fn brute_force_anns(inst: &AnnsInstance) -> ClosestPair {
    let mut best = ClosestPair {
        i: 0,
        j: 0,
        sq_dist: usize::MAX,
    };
    for i in 0..inst.n() {
        for j in 0..inst.n() {
            let dist = inst.sq_dist(i, j);
            if dist < best.sq_dist {
                best = ClosestPair { i, j, sq_dist: dist };
            }
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    Case1,
    Case2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Case1,
    Case2,
    Indeterminate,
}

impl From<Case> for Verdict {
    fn from(c: Case) -> Self {
        match c {
            Case::Case1 => Verdict::Case1,
            Case::Case2 => Verdict::Case2,
        }
    }
}

/// Ground truth for one query `b_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QueryTruth {
    pub min_sq_dist: usize,
    /// `Case1` if some `a_i` is within `t`, `Case2` if every `a_i` is at
    /// least `(1 + delta) t` away, `None` when the query breaks the promise.
    pub promise: Option<Case>,
}

pub fn query_truths(inst: &AnnsInstance) -> Vec<QueryTruth> {
    (0..inst.n())
        .map(|j| {
            let min_sq_dist = (0..inst.n()).map(|i| inst.sq_dist(i, j)).min().unwrap_or(usize::MAX);
            let dist = min_sq_dist as f64;
            let promise = if dist <= inst.t {
                Some(Case::Case1)
            } else if dist >= (1.0 + inst.delta) * inst.t {
                Some(Case::Case2)
            } else {
                None
            };
            QueryTruth { min_sq_dist, promise }
        })
        .collect()
}

/// Small-threshold path: for each `a_i`, enumerate every binary vector at
/// Hamming distance `< t` and look it up among the `b_j`. Case 1 iff a hit.
pub fn scenario1_brute_force(inst: &AnnsInstance, cost_cap: u128) -> Result<Vec<Case>> {
    let d = inst.d();
    let radius = (inst.t.ceil() as usize).saturating_sub(1).min(d);
    let ball: u128 = (0..=radius)
        .map(|k| crate::feature_map::binomial(d as u64, k as u64).unwrap_or(u128::MAX))
        .fold(0u128, u128::saturating_add);
    let cost = ball.saturating_mul(inst.n() as u128);
    if cost > cost_cap {
        return Err(Error::CostCapExceeded { cost, cap: cost_cap });
    }
    let targets: HashSet<&[u8]> = (0..inst.n()).map(|j| inst.b_row(j)).collect();
    Ok((0..inst.n())
        .map(|i| {
            let mut probe = inst.a_row(i).to_vec();
            if ball_hits(&mut probe, 0, radius, &targets) {
                Case::Case1
            } else {
                Case::Case2
            }
        })
        .collect())
}

/// Depth-first walk over all flip sets of size `<= budget` among positions
/// `from..`, testing each resulting vector.
fn ball_hits(probe: &mut [u8], from: usize, budget: usize, targets: &HashSet<&[u8]>) -> bool {
    if targets.contains(&*probe) {
        return true;
    }
    if budget == 0 {
        return false;
    }
    for pos in from..probe.len() {
        probe[pos] ^= 1;
        let hit = ball_hits(probe, pos + 1, budget - 1, targets);
        probe[pos] ^= 1;
        if hit {
            return true;
        }
    }
    false
}

/// How the bottom-left `n x n` block of `A` is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AConvention {
    /// Zero the block before normalizing, as the construction's analysis
    /// assumes.
    #[default]
    AsWritten,
    /// Keep the true entries `exp(0) = 1`.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReductionParams {
    pub n: usize,
    pub d: usize,
    /// `C = d / ln n`.
    pub c: f64,
    /// `C0 = t / ln n`.
    pub c0: f64,
    pub c_beta: f64,
    pub c_alpha: f64,
    /// `B = C_beta sqrt(ln n)`.
    pub norm_bound: f64,
    /// `1 / (2d)`.
    pub beta: f64,
    /// Exponent of the constant blocks of `A`, `beta B^2 d = B^2 / 2`.
    pub log_block: f64,
    /// `ln t~` with `t~ = exp(B^2 (1 - t/d) / 4) / (6 n exp(log_block))`.
    pub log_t_tilde: f64,
    pub t_tilde: f64,
    /// `ln t~` if the constant blocks were `exp(B^2)`.
    pub log_t_tilde_unit_block: f64,
    /// `ln delta_H = -C_alpha ln n`.
    pub log_delta_h: f64,
    pub delta_h: f64,
    /// Whether `exp(B^2)` is representable below `1e300`.
    pub fits_linear_range: bool,
}

impl ReductionParams {
    /// `C_beta = 2.1 sqrt(C / (C0 delta))` and
    /// `C_alpha = C_beta^2 (3 + C0/C) / 4 + 1.1`.
    pub fn default_constants(inst: &AnnsInstance) -> (f64, f64) {
        let ratio = inst.d() as f64 / inst.t; // C / C0
        let c_beta = C_BETA_SLACK * (ratio / inst.delta).sqrt();
        let c_alpha = c_beta * c_beta / 4.0 * (3.0 + 1.0 / ratio) + C_ALPHA_SLACK;
        (c_beta, c_alpha)
    }

    pub fn new(inst: &AnnsInstance, c_beta: f64, c_alpha: f64) -> Result<Self> {
        let n = inst.n();
        let d = inst.d();
        if n < 2 {
            return Err(Error::InvalidParams("need n >= 2 so that ln n > 0".into()));
        }
        let ln_n = (n as f64).ln();
        let c = d as f64 / ln_n;
        let c0 = inst.t / ln_n;
        let beta_floor = 2.0 * (c / (c0 * inst.delta)).sqrt();
        if !(c_beta > beta_floor) {
            return Err(Error::InvalidParams(format!(
                "C_beta > 2 sqrt(C/(C0 delta)) violated: {c_beta} <= {beta_floor}"
            )));
        }
        let alpha_floor = c_beta * c_beta / 4.0 * (3.0 + c0 / c) + 1.0;
        if !(c_alpha > alpha_floor) {
            return Err(Error::InvalidParams(format!(
                "C_alpha > C_beta^2 (3 + C0/C)/4 + 1 violated: {c_alpha} <= {alpha_floor}"
            )));
        }
        let norm_bound = c_beta * ln_n.sqrt();
        let b2 = norm_bound * norm_bound;
        let beta = 1.0 / (2 * d) as f64;
        let log_block = beta * b2 * d as f64;
        let shared = b2 * (1.0 - inst.t / d as f64) / 4.0 - (6.0 * n as f64).ln();
        let log_t_tilde = shared - log_block;
        let log_t_tilde_unit_block = shared - b2;
        let log_delta_h = -c_alpha * ln_n;
        if log_t_tilde < log_delta_h {
            return Err(Error::InvalidParams(format!(
                "t~ >= delta_H violated: ln t~ = {log_t_tilde} < ln delta_H = {log_delta_h}"
            )));
        }
        Ok(Self {
            n,
            d,
            c,
            c0,
            c_beta,
            c_alpha,
            norm_bound,
            beta,
            log_block,
            log_t_tilde,
            t_tilde: log_t_tilde.exp(),
            log_t_tilde_unit_block,
            log_delta_h,
            delta_h: log_delta_h.exp(),
            fits_linear_range: b2 < 1e300f64.ln(),
        })
    }

    /// `ln(2 t~)`, the decision threshold.
    pub fn log_threshold(&self) -> f64 {
        std::f64::consts::LN_2 + self.log_t_tilde
    }
}

#[derive(Debug, Clone)]
pub struct AhopInstance {
    pub memory: PatternMatrix,
    pub queries: PatternMatrix,
    pub params: ReductionParams,
}

pub fn build_ahop_instance(inst: &AnnsInstance, c_beta: f64, c_alpha: f64) -> Result<AhopInstance> {
    let params = ReductionParams::new(inst, c_beta, c_alpha)?;
    let (n, d, b) = (inst.n(), inst.d(), params.norm_bound);
    let mut xi = Array2::zeros((2 * n, 2 * d));
    let mut x = Array2::zeros((2 * n, 2 * d));
    for i in 0..n {
        for l in 0..d {
            xi[[i, l]] = b * inst.a[[i, l]] as f64;
            x[[i, l]] = b * inst.b[[i, l]] as f64;
        }
    }
    for col in 0..2 * n {
        for l in d..2 * d {
            xi[[col, l]] = b;
            if col >= n {
                x[[col, l]] = b;
            }
        }
    }
    let memory = PatternMatrix::from_rows(xi, Role::Memory)?;
    let queries = PatternMatrix::from_rows(x, Role::Query)?;
    debug_assert!(memory.max_norm() <= b && queries.max_norm() <= b);
    Ok(AhopInstance {
        memory,
        queries,
        params,
    })
}

impl AhopInstance {
    fn n(&self) -> usize {
        self.params.n
    }

    fn masked(&self, row: usize, col: usize, convention: AConvention) -> bool {
        convention == AConvention::AsWritten && row >= self.n() && col < self.n()
    }

    /// `beta <xi_row, x_col>`.
    pub fn score(&self, row: usize, col: usize) -> f64 {
        let s: f64 = self
            .memory
            .pattern(row)
            .iter()
            .zip(self.queries.pattern(col))
            .map(|(a, b)| a * b)
            .sum();
        self.params.beta * s
    }

    /// `ln A` under the chosen convention; masked entries are `-inf`.
    pub fn log_a(&self, convention: AConvention) -> Array2<f64> {
        let m = 2 * self.n();
        Array2::from_shape_fn((m, m), |(r, c)| {
            if self.masked(r, c, convention) {
                f64::NEG_INFINITY
            } else {
                self.score(r, c)
            }
        })
    }

    /// `ln D_ii`, the log row sums of `A`.
    pub fn log_row_sums(&self, convention: AConvention) -> Vec<f64> {
        self.log_a(convention)
            .axis_iter(Axis(0))
            .map(|row| log_sum_exp(row.iter().copied()))
            .collect()
    }
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Per-query decisions for `j in 0..n`.
#[derive(Debug, Clone, Serialize)]
pub struct CaseDecision {
    pub verdicts: Vec<Verdict>,
    /// `z~_{2d}[j] / B`; may underflow to 0, see `log_statistics`.
    pub statistics: Vec<f64>,
    pub log_statistics: Vec<f64>,
    /// `2 t~`.
    pub threshold: f64,
    pub log_threshold: f64,
}

/// Runs memory-normalized retrieval on the constructed instance and
/// thresholds the last output row at `2 t~` (ties go to Case 1).
pub fn solve_gap_anns_via_ahop(
    ahop: &AhopInstance,
    mode: RetrievalMode,
    convention: AConvention,
    lowrank: &RetrievalConfig,
) -> Result<CaseDecision> {
    let log_statistics = match mode {
        RetrievalMode::Dense => dense_log_statistics(ahop, convention),
        RetrievalMode::LowRank => lowrank_log_statistics(ahop, convention, lowrank)?,
    };
    let log_threshold = ahop.params.log_threshold();
    let verdicts = log_statistics
        .iter()
        .map(|&s| {
            if s.is_nan() {
                Verdict::Indeterminate
            } else if s >= log_threshold {
                Verdict::Case1
            } else {
                Verdict::Case2
            }
        })
        .collect();
    Ok(CaseDecision {
        verdicts,
        statistics: log_statistics.iter().map(|s| s.exp()).collect(),
        log_statistics,
        threshold: log_threshold.exp(),
        log_threshold,
    })
}

fn dense_log_statistics(ahop: &AhopInstance, convention: AConvention) -> Vec<f64> {
    let log_a = ahop.log_a(convention);
    let log_d: Vec<f64> = log_a
        .axis_iter(Axis(0))
        .map(|row| log_sum_exp(row.iter().copied()))
        .collect();
    (0..ahop.n())
        .map(|j| log_sum_exp(log_a.column(j).iter().zip(&log_d).map(|(a, d)| a - d)))
        .collect()
}

/// Same statistic from the factors `U1 U2^T ~ A`; the masked block is
/// removed by splitting the factored sums at row/column `n`.
fn lowrank_log_statistics(ahop: &AhopInstance, convention: AConvention, cfg: &RetrievalConfig) -> Result<Vec<f64>> {
    let cfg = RetrievalConfig {
        beta: ahop.params.beta,
        normalization: Normalization::MemoryNormalized,
        ..*cfg
    };
    let f = lowrank_factors(&ahop.memory, &ahop.queries, &cfg)?;
    let n = ahop.n();
    let col_sum_all = f.u2.sum_axis(Axis(0));
    let col_sum_tail = f.u2.slice(ndarray::s![n.., ..]).sum_axis(Axis(0));
    let row_sums: Vec<f64> = f
        .u1
        .axis_iter(Axis(0))
        .enumerate()
        .map(|(r, u)| {
            if convention == AConvention::AsWritten && r >= n {
                u.dot(&col_sum_tail)
            } else {
                u.dot(&col_sum_all)
            }
        })
        .collect();
    if let Some(index) = row_sums.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::NonPositiveNormalizer {
            index,
            value: row_sums[index],
        });
    }
    let rows_used = match convention {
        AConvention::AsWritten => n,
        AConvention::Literal => 2 * n,
    };
    let mut weighted = ndarray::Array1::<f64>::zeros(f.u1.ncols());
    for r in 0..rows_used {
        weighted.scaled_add(1.0 / row_sums[r], &f.u1.row(r));
    }
    Ok((0..n).map(|j| f.u2.row(j).dot(&weighted).ln()).collect())
}

/// Random instance whose rows all have exactly `d/2` ones. With
/// `planted = Some(k)`, one random pair `(a_i, b_j)` is placed at squared
/// distance exactly `k` by swapping `k/2` ones of `a_i` with `k/2` zeros.
pub fn generate_balanced_instance(
    n: usize,
    d: usize,
    t: f64,
    delta: f64,
    planted: Option<usize>,
    seed: u64,
) -> Result<(AnnsInstance, Option<(usize, usize)>)> {
    if d == 0 || d % 2 != 0 {
        return Err(Error::InvalidArgument(format!("balanced rows need an even d, got {d}")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if let Some(k) = planted {
        if k % 2 != 0 || k > d {
            return Err(Error::InfeasiblePlant { k, d });
        }
    }
    let mut rng = rng::stream(seed, &[n as u64, d as u64]);
    let mut positions: Vec<usize> = (0..d).collect();
    let mut random_row = |rng: &mut rand_chacha::ChaCha8Rng| {
        positions.shuffle(rng);
        let mut row = vec![0u8; d];
        positions[..d / 2].iter().for_each(|&p| row[p] = 1);
        row
    };
    let a_rows: Vec<Vec<u8>> = (0..n).map(|_| random_row(&mut rng)).collect();
    let mut b_rows: Vec<Vec<u8>> = (0..n).map(|_| random_row(&mut rng)).collect();

    let mut pair = None;
    if let Some(k) = planted {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        let mut row = a_rows[i].clone();
        let mut ones: Vec<usize> = (0..d).filter(|&p| row[p] == 1).collect();
        let mut zeros: Vec<usize> = (0..d).filter(|&p| row[p] == 0).collect();
        ones.shuffle(&mut rng);
        zeros.shuffle(&mut rng);
        for (&o, &z) in ones.iter().zip(&zeros).take(k / 2) {
            row[o] = 0;
            row[z] = 1;
        }
        b_rows[j] = row;
        pair = Some((i, j));
    }

    let to_array = |rows: Vec<Vec<u8>>| {
        Array2::from_shape_vec((n, d), rows.into_iter().flatten().collect()).expect("n x d entries")
    };
    Ok((AnnsInstance::new(to_array(a_rows), to_array(b_rows), t, delta)?, pair))
}

/// Balanced instance in which every pair is at least `(1 + delta) t` apart,
/// by rejection sampling. Returns the instance and the number of draws.
pub fn generate_separated_instance(
    n: usize,
    d: usize,
    t: f64,
    delta: f64,
    seed: u64,
    max_attempts: usize,
) -> Result<(AnnsInstance, usize)> {
    for attempt in 0..max_attempts {
        let (inst, _) = generate_balanced_instance(n, d, t, delta, None, rng::derive_seed(seed, &[attempt as u64]))?;
        if (brute_force_anns(&inst).sq_dist as f64) >= (1.0 + delta) * t {
            return Ok((inst, attempt + 1));
        }
    }
    Err(Error::InvalidParams(format!(
        "no balanced {n} x {d} instance with all distances >= {} in {max_attempts} draws",
        (1.0 + delta) * t
    )))
}

/// Smallest even `d >= c ln n`.
pub fn even_dimension(n: usize, c: f64) -> usize {
    let raw = (c * (n as f64).ln()).ceil() as usize;
    (raw + raw % 2).max(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionExperiment {
    pub n: usize,
    pub d: usize,
    pub t: f64,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    pub convention: AConvention,
}

impl ReductionExperiment {
    pub fn new(n: usize, d: usize, trials: usize, seed: u64) -> Self {
        Self {
            n,
            d,
            t: 4.0,
            delta: DEFAULT_DELTA,
            trials,
            seed,
            convention: AConvention::AsWritten,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Plant {
    Case1,
    Case2,
}

#[derive(Debug, Clone, Serialize)]
pub struct QueryRecord {
    pub j: usize,
    pub min_sq_dist: usize,
    pub promise: Option<Case>,
    pub verdict: Verdict,
    pub log_statistic: f64,
    pub agrees: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub plant: Plant,
    pub seed: u64,
    pub planted_pair: Option<(usize, usize)>,
    pub params: ReductionParams,
    pub log_threshold: f64,
    pub queries: Vec<QueryRecord>,
    /// Set when the instance does not realize the planted case.
    pub promise_violation: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReductionReport {
    pub experiment: ReductionExperiment,
    pub trials: Vec<TrialRecord>,
    pub promised_queries: usize,
    pub agreeing_queries: usize,
    /// `agreeing / promised`; `None` when nothing was promised.
    pub agreement: Option<f64>,
}

/// Runs one planted trial end to end against the brute-force oracle.
pub fn run_reduction_trial(exp: &ReductionExperiment, trial: usize, plant: Plant) -> Result<TrialRecord> {
    let seed = rng::derive_seed(exp.seed, &[trial as u64, plant as u64]);
    let (inst, planted_pair) = match plant {
        Plant::Case1 => {
            let k = 2 * (exp.t.floor() as usize / 2);
            generate_balanced_instance(exp.n, exp.d, exp.t, exp.delta, Some(k), seed)?
        }
        Plant::Case2 => (generate_separated_instance(exp.n, exp.d, exp.t, exp.delta, seed, 10_000)?.0, None),
    };
    let (c_beta, c_alpha) = ReductionParams::default_constants(&inst);
    let ahop = build_ahop_instance(&inst, c_beta, c_alpha)?;
    let cfg = RetrievalConfig::new(ahop.params.beta, 1e-3)?;
    let decision = solve_gap_anns_via_ahop(&ahop, RetrievalMode::Dense, exp.convention, &cfg)?;
    let truths = query_truths(&inst);

    let promise_violation = match (plant, planted_pair) {
        (Plant::Case1, Some((_, j))) if truths[j].promise != Some(Case::Case1) => {
            Some(format!("planted query {j} is not within t"))
        }
        (Plant::Case2, _) if truths.iter().any(|q| q.promise != Some(Case::Case2)) => {
            Some("some query is within (1 + delta) t".into())
        }
        _ if !inst.is_balanced() => Some("rows are not balanced".into()),
        _ => None,
    };

    let queries = truths
        .iter()
        .enumerate()
        .map(|(j, truth)| QueryRecord {
            j,
            min_sq_dist: truth.min_sq_dist,
            promise: truth.promise,
            verdict: decision.verdicts[j],
            log_statistic: decision.log_statistics[j],
            agrees: truth.promise.map(|c| Verdict::from(c) == decision.verdicts[j]),
        })
        .collect();
    Ok(TrialRecord {
        trial,
        plant,
        seed,
        planted_pair,
        params: ahop.params,
        log_threshold: decision.log_threshold,
        queries,
        promise_violation,
    })
}

/// Alternates Case-1-planted and Case-2 instances and reports how often the
/// retrieval verdict matches the oracle on promised queries.
pub fn verify_reduction(exp: &ReductionExperiment) -> Result<ReductionReport> {
    let trials = (0..exp.trials)
        .map(|trial| {
            let plant = if trial % 2 == 0 { Plant::Case1 } else { Plant::Case2 };
            run_reduction_trial(exp, trial, plant)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(*exp, trials))
}

pub fn summarize(experiment: ReductionExperiment, trials: Vec<TrialRecord>) -> ReductionReport {
    let (promised, agreeing) = trials
        .iter()
        .flat_map(|t| &t.queries)
        .filter_map(|q| q.agrees)
        .fold((0, 0), |(p, a), ok| (p + 1, a + ok as usize));
    ReductionReport {
        experiment,
        trials,
        promised_queries: promised,
        agreeing_queries: agreeing,
        agreement: (promised > 0).then(|| agreeing as f64 / promised as f64),
    }
}
