//! Modern Hopfield retrieval: the exact softmax update and its almost-linear
//! low-rank approximation.
//!
//! With memories `Xi` (`d x M`) and queries `X` (`d x L`), the score matrix is
//! `A = exp(beta Xi^T X)` (`M x L`). Two normalizations are supported:
//!
//! * [`Normalization::QueryNormalized`]: `Z = Xi A N^{-1}` with `N` the column
//!   sums of `A`. Every output column is a convex combination of memories;
//!   this is the usual one-step retrieval.
//! * [`Normalization::MemoryNormalized`]: `Z = Xi D^{-1} A` with `D` the row
//!   sums of `A`, the convention used by the hardness reduction.
//!
//! The low-rank path replaces `A` by `U1 U2^T = P(beta Xi^T X)` where `P`
//! approximates `exp` to relative error `delta_a`, and never forms an
//! `M x L` matrix.

use std::time::Instant;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feature_map::{factored_col_sums, factored_row_sums, MonomialFeatureMap, DEFAULT_RANK_CAP};
use crate::pattern::{PatternMatrix, Role};
use crate::poly_approx::{fit_exp_poly, ExpPolynomial, DEFAULT_MAX_DEGREE, MAX_REL_ERROR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    QueryNormalized,
    MemoryNormalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetrievalMode {
    Dense,
    #[default]
    LowRank,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetrievalConfig {
    pub beta: f64,
    pub delta_a: f64,
    pub normalization: Normalization,
    pub max_degree: usize,
    pub rank_cap: usize,
}

impl RetrievalConfig {
    pub fn new(beta: f64, delta_a: f64) -> Result<Self> {
        let cfg = Self {
            beta,
            delta_a,
            normalization: Normalization::default(),
            max_degree: DEFAULT_MAX_DEGREE,
            rank_cap: DEFAULT_RANK_CAP,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn with_max_degree(mut self, max_degree: usize) -> Self {
        self.max_degree = max_degree;
        self
    }

    pub fn with_rank_cap(mut self, rank_cap: usize) -> Self {
        self.rank_cap = rank_cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidArgument(format!("beta must be positive, got {}", self.beta)));
        }
        if !(self.delta_a > 0.0 && self.delta_a < MAX_REL_ERROR) {
            return Err(Error::InvalidTolerance(self.delta_a));
        }
        if self.max_degree == 0 {
            return Err(Error::InvalidArgument("max_degree must be at least 1".into()));
        }
        Ok(())
    }
}

/// Output of one retrieval step.
#[derive(Debug, Clone, Serialize)]
pub struct RetrievalResult {
    /// `d x L`, one retrieved pattern per column.
    #[serde(skip)]
    pub z: Array2<f64>,
    pub rank_used: usize,
    pub degree_used: usize,
    pub wall_time: f64,
    /// `2 M B delta_a` for the low-rank path, 0 for the dense path.
    pub error_bound: f64,
}

impl RetrievalResult {
    /// Output columns as a query-role pattern matrix.
    pub fn patterns(&self) -> Result<PatternMatrix> {
        PatternMatrix::from_columns(self.z.clone(), Role::Query)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.z.column(j).to_vec()
    }
}

/// `log(sum_mu exp(beta z_mu)) / beta`, shifted by the max for stability.
pub fn lse(beta: f64, z: &[f64]) -> Result<f64> {
    if z.is_empty() {
        return Err(Error::EmptyVector("lse"));
    }
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = z.iter().map(|&v| (beta * (v - max)).exp()).sum();
    Ok(max + sum.ln() / beta)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_dims(memory: &PatternMatrix, found: usize, context: &'static str) -> Result<()> {
    if memory.dim() != found {
        return Err(Error::DimensionMismatch {
            context,
            expected: memory.dim(),
            found,
        });
    }
    Ok(())
}

/// `E(x) = -lse(beta, Xi^T x) + <x, x> / 2`.
pub fn energy(memory: &PatternMatrix, x: &[f64], beta: f64) -> Result<f64> {
    check_dims(memory, x.len(), "energy")?;
    let scores: Vec<f64> = memory.patterns().map(|p| dot(p, x)).collect();
    Ok(-lse(beta, &scores)? + 0.5 * dot(x, x))
}

/// Dense weight matrix (`M x L`): columns sum to one for
/// `QueryNormalized`, rows sum to one for `MemoryNormalized`.
pub fn dense_weights(
    memory: &PatternMatrix,
    queries: &PatternMatrix,
    beta: f64,
    normalization: Normalization,
) -> Result<Array2<f64>> {
    check_dims(memory, queries.dim(), "dense_weights")?;
    let (m, l) = (memory.len(), queries.len());
    let mut scores = Array2::zeros((m, l));
    for (i, xi) in memory.patterns().enumerate() {
        for (j, x) in queries.patterns().enumerate() {
            scores[[i, j]] = beta * dot(xi, x);
        }
    }
    let axis = match normalization {
        Normalization::QueryNormalized => Axis(1),
        Normalization::MemoryNormalized => Axis(0),
    };
    for mut lane in scores.axis_iter_mut(axis) {
        let max = lane.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        lane.mapv_inplace(|s| (s - max).exp());
        let sum = lane.sum();
        lane.mapv_inplace(|w| w / sum);
    }
    Ok(scores)
}

fn assemble_columns(d: usize, columns: Vec<Vec<f64>>) -> Array2<f64> {
    let l = columns.len();
    let flat: Vec<f64> = columns.into_iter().flatten().collect();
    Array2::from_shape_vec((l, d), flat)
        .expect("every column has d entries")
        .reversed_axes()
}

/// Exact retrieval, `Theta(d M L)` time. Columns are computed independently
/// (in parallel) with a fixed summation order, so the output does not depend
/// on the thread count.
pub fn retrieve_dense(
    memory: &PatternMatrix,
    queries: &PatternMatrix,
    cfg: &RetrievalConfig,
) -> Result<RetrievalResult> {
    cfg.validate()?;
    check_dims(memory, queries.dim(), "retrieve_dense")?;
    let start = Instant::now();
    let d = memory.dim();
    let beta = cfg.beta;

    let columns: Vec<Vec<f64>> = match cfg.normalization {
        Normalization::QueryNormalized => (0..queries.len())
            .into_par_iter()
            .map(|j| {
                let x = queries.pattern(j);
                let scores: Vec<f64> = memory.patterns().map(|xi| beta * dot(xi, x)).collect();
                let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let mut out = vec![0.0; d];
                let mut sum = 0.0;
                for (xi, s) in memory.patterns().zip(&scores) {
                    let w = (s - max).exp();
                    sum += w;
                    out.iter_mut().zip(xi).for_each(|(o, v)| *o += w * v);
                }
                out.iter_mut().for_each(|o| *o /= sum);
                out
            })
            .collect(),
        Normalization::MemoryNormalized => {
            let log_row_sums: Vec<f64> = (0..memory.len())
                .into_par_iter()
                .map(|i| {
                    let xi = memory.pattern(i);
                    let scores: Vec<f64> = queries.patterns().map(|x| beta * dot(xi, x)).collect();
                    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln()
                })
                .collect();
            (0..queries.len())
                .into_par_iter()
                .map(|j| {
                    let x = queries.pattern(j);
                    let mut out = vec![0.0; d];
                    for (xi, log_d) in memory.patterns().zip(&log_row_sums) {
                        let w = (beta * dot(xi, x) - log_d).exp();
                        out.iter_mut().zip(xi).for_each(|(o, v)| *o += w * v);
                    }
                    out
                })
                .collect()
        }
    };

    Ok(RetrievalResult {
        z: assemble_columns(d, columns),
        rank_used: 0,
        degree_used: 0,
        wall_time: start.elapsed().as_secs_f64(),
        error_bound: 0.0,
    })
}

/// The pieces of the low-rank approximation `U1 U2^T ~ exp(beta Xi^T X)`.
#[derive(Debug, Clone)]
pub struct LowRankFactors {
    pub poly: ExpPolynomial,
    pub map: MonomialFeatureMap,
    /// `M x r`, rows `phi_u(sqrt(beta) xi_mu)`.
    pub u1: Array2<f64>,
    /// `L x r`, rows `phi_v(sqrt(beta) x_l)`.
    pub u2: Array2<f64>,
    /// `max(||Xi||_max, ||X||_max)`.
    pub norm_bound: f64,
}

impl LowRankFactors {
    /// Approximate row sums of `A`, `U1 (U2^T 1)`.
    pub fn row_sums(&self) -> Array1<f64> {
        factored_row_sums(self.u1.view(), self.u2.view()).expect("factors share the rank")
    }

    /// Approximate column sums of `A`, `U2 (U1^T 1)`.
    pub fn col_sums(&self) -> Array1<f64> {
        factored_col_sums(self.u1.view(), self.u2.view()).expect("factors share the rank")
    }
}

/// Smallest interval bound handed to the polynomial fit when both inputs are
/// identically zero.
const MIN_INTERVAL_BOUND: f64 = 1e-12;

/// Steps 1-3 of the low-rank algorithm: fit `P` on `[-B^2 beta d, B^2 beta d]`,
/// build the feature map, and evaluate it on the `sqrt(beta)`-scaled rows.
pub fn lowrank_factors(
    memory: &PatternMatrix,
    queries: &PatternMatrix,
    cfg: &RetrievalConfig,
) -> Result<LowRankFactors> {
    cfg.validate()?;
    check_dims(memory, queries.dim(), "retrieve_lowrank")?;
    let d = memory.dim();
    let norm_bound = memory.max_norm().max(queries.max_norm());
    let interval = (norm_bound * norm_bound * cfg.beta * d as f64).max(MIN_INTERVAL_BOUND);
    let poly = fit_exp_poly(interval, cfg.delta_a, cfg.max_degree)?;
    let map = MonomialFeatureMap::with_rank_cap(poly.polynomial(), d, cfg.rank_cap)?;
    let root_beta = cfg.beta.sqrt();
    let x_rows = memory.rows().mapv(|v| v * root_beta);
    let y_rows = queries.rows().mapv(|v| v * root_beta);
    let (u1, u2) = map.factor_matrices(x_rows.view(), y_rows.view())?;
    Ok(LowRankFactors {
        poly,
        map,
        u1,
        u2,
        norm_bound,
    })
}

fn check_positive(normalizer: &Array1<f64>) -> Result<()> {
    match normalizer.iter().position(|&v| !(v > 0.0)) {
        Some(index) => Err(Error::NonPositiveNormalizer {
            index,
            value: normalizer[index],
        }),
        None => Ok(()),
    }
}

/// Almost-linear approximate retrieval in `O(tau r (d + g))` time,
/// `tau = max(M, L)`, with `||Z_lowrank - Z_dense||_max <= 2 M B delta_a`.
pub fn retrieve_lowrank(
    memory: &PatternMatrix,
    queries: &PatternMatrix,
    cfg: &RetrievalConfig,
) -> Result<RetrievalResult> {
    let start = Instant::now();
    let factors = lowrank_factors(memory, queries, cfg)?;
    let xi = memory.columns();
    let z = match cfg.normalization {
        Normalization::QueryNormalized => {
            let col_sums = factors.col_sums();
            check_positive(&col_sums)?;
            let mut z = xi.dot(&factors.u1).dot(&factors.u2.t());
            for (mut col, s) in z.axis_iter_mut(Axis(1)).zip(col_sums.iter()) {
                col.mapv_inplace(|v| v / s);
            }
            z
        }
        Normalization::MemoryNormalized => {
            let row_sums = factors.row_sums();
            check_positive(&row_sums)?;
            let mut u1 = factors.u1.clone();
            for (mut row, s) in u1.axis_iter_mut(Axis(0)).zip(row_sums.iter()) {
                row.mapv_inplace(|v| v / s);
            }
            xi.dot(&u1).dot(&factors.u2.t())
        }
    };
    Ok(RetrievalResult {
        z,
        rank_used: factors.map.rank(),
        degree_used: factors.poly.degree(),
        wall_time: start.elapsed().as_secs_f64(),
        error_bound: 2.0 * memory.len() as f64 * factors.norm_bound * cfg.delta_a,
    })
}

pub fn retrieve(
    memory: &PatternMatrix,
    queries: &PatternMatrix,
    cfg: &RetrievalConfig,
    mode: RetrievalMode,
) -> Result<RetrievalResult> {
    match mode {
        RetrievalMode::Dense => retrieve_dense(memory, queries, cfg),
        RetrievalMode::LowRank => retrieve_lowrank(memory, queries, cfg),
    }
}

/// Entrywise max absolute difference.
pub fn max_norm_error(approx: ArrayView2<'_, f64>, exact: ArrayView2<'_, f64>) -> Result<f64> {
    if approx.dim() != exact.dim() {
        let (found, expected) = if approx.nrows() != exact.nrows() {
            (approx.nrows(), exact.nrows())
        } else {
            (approx.ncols(), exact.ncols())
        };
        return Err(Error::DimensionMismatch {
            context: "max_norm_error",
            expected,
            found,
        });
    }
    Ok(approx
        .iter()
        .zip(exact.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// `Delta_mu = min_{nu != mu} (<xi_mu, xi_mu> - <xi_mu, xi_nu>)`.
pub fn separation(memory: &PatternMatrix, mu: usize) -> Result<f64> {
    if memory.len() < 2 {
        return Err(Error::SingleMemory);
    }
    memory.check_index(mu)?;
    let xi = memory.pattern(mu);
    let own = dot(xi, xi);
    Ok(memory
        .patterns()
        .enumerate()
        .filter(|&(nu, _)| nu != mu)
        .map(|(_, other)| own - dot(xi, other))
        .fold(f64::INFINITY, f64::min))
}

/// Half the smallest pairwise distance between stored patterns.
pub fn pattern_radius(memory: &PatternMatrix) -> Result<f64> {
    if memory.len() < 2 {
        return Err(Error::SingleMemory);
    }
    let min_sq = (0..memory.len())
        .into_par_iter()
        .map(|a| {
            let pa = memory.pattern(a);
            ((a + 1)..memory.len())
                .map(|b| {
                    pa.iter()
                        .zip(memory.pattern(b))
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum::<f64>()
                })
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(0.5 * min_sq.sqrt())
}

/// Bound on `||T(x) - xi_mu||_max` for the low-rank update:
/// `2 B (M - 1) exp(-beta (<xi_mu, x> - max_nu <xi_mu, xi_nu>)) + 2 M B delta_a`.
/// The max runs over every stored pattern, `mu` included.
pub fn retrieval_error_bound(
    memory: &PatternMatrix,
    x: &[f64],
    mu: usize,
    beta: f64,
    norm_bound: f64,
    delta_a: f64,
) -> Result<f64> {
    check_dims(memory, x.len(), "retrieval_error_bound")?;
    memory.check_index(mu)?;
    let xi = memory.pattern(mu);
    let max_overlap = memory
        .patterns()
        .map(|other| dot(xi, other))
        .fold(f64::NEG_INFINITY, f64::max);
    let m = memory.len() as f64;
    let retrieval = if memory.len() > 1 {
        2.0 * norm_bound * (m - 1.0) * (-beta * (dot(xi, x) - max_overlap)).exp()
    } else {
        0.0
    };
    Ok(retrieval + 2.0 * m * norm_bound * delta_a)
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedPointTrace {
    /// `x_0, x_1, ...`; one entry per completed step plus the start.
    pub trajectory: Vec<Vec<f64>>,
    /// Energy of every trajectory entry.
    pub energies: Vec<f64>,
    /// Index of the first stored pattern within `eps` of an iterate.
    pub converged_to: Option<usize>,
    pub converged_step: Option<usize>,
}

/// Repeatedly applies the query-normalized update `x <- Xi softmax(beta Xi^T x)`
/// (dense or low-rank), stopping once an iterate lies within `eps` (Euclidean)
/// of a stored pattern or after `steps` updates.
pub fn fixed_point_iterate(
    memory: &PatternMatrix,
    x0: &[f64],
    cfg: &RetrievalConfig,
    mode: RetrievalMode,
    steps: usize,
    eps: f64,
) -> Result<FixedPointTrace> {
    check_dims(memory, x0.len(), "fixed_point_iterate")?;
    let cfg = cfg.with_normalization(Normalization::QueryNormalized);
    let mut trace = FixedPointTrace {
        trajectory: vec![x0.to_vec()],
        energies: vec![energy(memory, x0, cfg.beta)?],
        converged_to: None,
        converged_step: None,
    };
    let mut x = x0.to_vec();
    for step in 1..=steps {
        let query = PatternMatrix::from_patterns(std::slice::from_ref(&x), Role::Query)?;
        x = retrieve(memory, &query, &cfg, mode)?.column(0);
        trace.energies.push(energy(memory, &x, cfg.beta)?);
        trace.trajectory.push(x.clone());
        let hit = memory.patterns().position(|xi| {
            xi.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() <= eps
        });
        if let Some(mu) = hit {
            trace.converged_to = Some(mu);
            trace.converged_step = Some(step);
            break;
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn mem(cols: Array2<f64>) -> PatternMatrix {
        PatternMatrix::from_columns(cols, Role::Memory).unwrap()
    }

    fn qry(cols: Array2<f64>) -> PatternMatrix {
        PatternMatrix::from_columns(cols, Role::Query).unwrap()
    }

    #[test]
    fn lse_cases() {
        assert!((lse(1.0, &[0.0, 0.0]).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(lse(2.0, &[5.0]).unwrap(), 5.0);
        assert!((lse(1.0, &[1000.0, 1000.0]).unwrap() - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert!(matches!(lse(1.0, &[]), Err(Error::EmptyVector(_))));
    }

    #[test]
    fn energy_cases() {
        let xi = [1.0, -2.0, 0.5];
        let m = mem(array![[1.0], [-2.0], [0.5]]);
        let sq: f64 = xi.iter().map(|v| v * v).sum();
        assert!((energy(&m, &xi, 0.7).unwrap() + 0.5 * sq).abs() < 1e-12);
        let m3 = mem(array![[1.0, 0.0, 2.0], [0.0, 1.0, 1.0]]);
        assert!((energy(&m3, &[0.0, 0.0], 1.0).unwrap() + 3f64.ln()).abs() < 1e-15);
        assert!(energy(&m3, &[0.0], 1.0).is_err());
    }

    #[test]
    fn single_memory_dense_and_lowrank() {
        let m = mem(array![[0.3], [-0.7]]);
        let q = qry(array![[0.1, 0.9, -0.4], [0.2, -0.5, 0.8]]);
        let cfg = RetrievalConfig::new(0.5, 1e-3).unwrap();
        for res in [retrieve_dense(&m, &q, &cfg).unwrap(), retrieve_lowrank(&m, &q, &cfg).unwrap()] {
            for col in res.z.columns() {
                assert!((col[0] - 0.3).abs() < 1e-12);
                assert!((col[1] + 0.7).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_term_softmax() {
        let m = mem(array![[1.0, 0.0], [0.0, 1.0]]);
        let q = qry(array![[1.0], [0.0]]);
        let cfg = RetrievalConfig::new(10.0, 1e-3).unwrap();
        let z = retrieve_dense(&m, &q, &cfg).unwrap().z;
        let sigma = 10f64.exp() / (10f64.exp() + 1.0);
        assert!((z[[0, 0]] - sigma).abs() < 1e-15);
        assert!((z[[1, 0]] - (1.0 - sigma)).abs() < 1e-15);
        assert!((z[[0, 0]] - 1.0).abs() <= 1e-4 && z[[1, 0]].abs() <= 1e-4);
    }

    #[test]
    fn empty_query_batch() {
        let m = mem(array![[1.0, 0.0], [0.0, 1.0]]);
        let q = PatternMatrix::empty_queries(2).unwrap();
        let cfg = RetrievalConfig::new(1.0, 1e-3).unwrap();
        assert_eq!(retrieve_dense(&m, &q, &cfg).unwrap().z.dim(), (2, 0));
        assert_eq!(retrieve_lowrank(&m, &q, &cfg).unwrap().z.dim(), (2, 0));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let m = mem(array![[1.0, 0.0], [0.0, 1.0]]);
        let q = qry(array![[1.0], [0.0], [2.0]]);
        let cfg = RetrievalConfig::new(1.0, 1e-3).unwrap();
        assert!(matches!(retrieve_dense(&m, &q, &cfg), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(retrieve_lowrank(&m, &q, &cfg), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn config_validation() {
        assert!(RetrievalConfig::new(0.0, 1e-3).is_err());
        assert!(RetrievalConfig::new(1.0, 0.2).is_err());
        assert!(RetrievalConfig::new(1.0, 1e-3).unwrap().with_max_degree(0).validate().is_err());
    }

    #[test]
    fn max_norm_error_cases() {
        let z = array![[1.0, 2.0], [3.0, 4.0]];
        assert_eq!(max_norm_error(z.view(), z.view()).unwrap(), 0.0);
        let mut w = z.clone();
        w[[1, 0]] += 0.5;
        assert_eq!(max_norm_error(w.view(), z.view()).unwrap(), 0.5);
        let bad = array![[1.0, 2.0]];
        assert!(max_norm_error(bad.view(), z.view()).is_err());
    }

    #[test]
    fn separation_and_radius() {
        let m = mem(array![[3.0, 0.0], [0.0, 3.0]]);
        assert_eq!(separation(&m, 0).unwrap(), 9.0);
        let dup = mem(array![[1.0, 1.0], [2.0, 2.0]]);
        assert_eq!(separation(&dup, 0).unwrap(), 0.0);
        assert_eq!(pattern_radius(&dup).unwrap(), 0.0);
        let zv = mem(array![[0.0, 3.0], [0.0, 4.0]]);
        assert_eq!(pattern_radius(&zv).unwrap(), 2.5);
        let single = mem(array![[1.0], [1.0]]);
        assert!(matches!(separation(&single, 0), Err(Error::SingleMemory)));
        assert!(matches!(pattern_radius(&single), Err(Error::SingleMemory)));
        assert!(matches!(separation(&m, 5), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn error_bound_cases() {
        let single = mem(array![[0.5], [-1.0]]);
        let b = retrieval_error_bound(&single, &[0.0, 0.0], 0, 1.0, 1.0, 1e-3).unwrap();
        assert!((b - 2e-3).abs() < 1e-18);
        let m = mem(array![[1.0, 0.0, 0.5], [0.0, 1.0, 0.5]]);
        let x = m.pattern(0).to_vec();
        let bound = retrieval_error_bound(&m, &x, 0, 2.0, 1.0, 1e-3).unwrap();
        assert!(bound >= 2.0 * 1.0 * 2.0 + 2.0 * 3.0 * 1e-3);
    }

    #[test]
    fn fixed_point_edge_cases() {
        let m = mem(array![[1.0], [2.0]]);
        let cfg = RetrievalConfig::new(1.0, 1e-3).unwrap();
        let t = fixed_point_iterate(&m, &[1.0, 2.0], &cfg, RetrievalMode::Dense, 0, 1e-6).unwrap();
        assert_eq!(t.trajectory.len(), 1);
        assert_eq!(t.converged_to, None);
        let t = fixed_point_iterate(&m, &[1.0, 2.0], &cfg, RetrievalMode::Dense, 5, 1e-6).unwrap();
        assert_eq!(t.converged_to, Some(0));
        assert_eq!(t.converged_step, Some(1));
    }
}
