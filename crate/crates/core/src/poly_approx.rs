//! Low-degree polynomial approximation of `exp` with a relative-error
//! certificate.
//!
//! Fitting is Chebyshev interpolation of `e^x` on `[-B', B']`, converted to
//! the power basis. Degrees are tried from 1 upward and the first one whose
//! relative error on a 4096-point uniform grid is within the target wins.
//!
//! Converting from the Chebyshev to the power basis loses accuracy as the
//! degree grows (the monomial basis is badly conditioned on wide intervals),
//! which is why the default degree cap is 32.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of uniform points (endpoints included) used to certify a fit.
pub const VALIDATION_GRID: usize = 4096;

/// Default upper limit on the fitted degree.
pub const DEFAULT_MAX_DEGREE: usize = 32;

/// Largest admissible relative error target (exclusive).
pub const MAX_REL_ERROR: f64 = 0.1;

/// A real polynomial in the power basis, `c_0 + c_1 x + ... + c_g x^g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial from power-basis coefficients. An empty slice is
    /// the zero polynomial of degree 0.
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        let mut coeffs = coeffs.into();
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    /// Truncated Taylor series of `exp` about 0.
    pub fn exp_taylor(degree: usize) -> Self {
        let mut coeffs = Vec::with_capacity(degree + 1);
        let mut term = 1.0;
        for k in 0..=degree {
            if k > 0 {
                term /= k as f64;
            }
            coeffs.push(term);
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Max of `|P(x) - e^x| / e^x` over `grid_points` uniform points on
    /// `[-bound, bound]`, endpoints included.
    pub fn sup_relative_error(&self, bound: f64, grid_points: usize) -> f64 {
        let n = grid_points.max(2);
        let step = 2.0 * bound / (n - 1) as f64;
        (0..n)
            .map(|i| {
                let x = if i == n - 1 { bound } else { -bound + step * i as f64 };
                (self.eval(x) * (-x).exp() - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// A polynomial certified to approximate `exp` on `[-B', B']` within a
/// relative error target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawExpPolynomial")]
pub struct ExpPolynomial {
    degree: usize,
    interval_bound: f64,
    target_rel_error: f64,
    certified_rel_error: f64,
    coeffs: Polynomial,
}

#[derive(Deserialize)]
struct RawExpPolynomial {
    degree: usize,
    interval_bound: f64,
    target_rel_error: f64,
    certified_rel_error: f64,
    coeffs: Vec<f64>,
}

impl TryFrom<RawExpPolynomial> for ExpPolynomial {
    type Error = Error;

    fn try_from(raw: RawExpPolynomial) -> Result<Self> {
        validate_inputs(raw.interval_bound, raw.target_rel_error)?;
        if raw.coeffs.len() != raw.degree + 1 {
            return Err(Error::Format(format!(
                "degree {} needs {} coefficients, found {}",
                raw.degree,
                raw.degree + 1,
                raw.coeffs.len()
            )));
        }
        if raw.certified_rel_error > raw.target_rel_error {
            return Err(Error::Format(format!(
                "certified error {:e} exceeds target {:e}",
                raw.certified_rel_error, raw.target_rel_error
            )));
        }
        Ok(Self {
            degree: raw.degree,
            interval_bound: raw.interval_bound,
            target_rel_error: raw.target_rel_error,
            certified_rel_error: raw.certified_rel_error,
            coeffs: Polynomial::new(raw.coeffs),
        })
    }
}

impl ExpPolynomial {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn interval_bound(&self) -> f64 {
        self.interval_bound
    }

    pub fn target_rel_error(&self) -> f64 {
        self.target_rel_error
    }

    pub fn certified_rel_error(&self) -> f64 {
        self.certified_rel_error
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.coeffs
    }

    pub fn coeffs(&self) -> &[f64] {
        self.coeffs.coeffs()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.eval(x)
    }

    pub fn sup_relative_error(&self, grid_points: usize) -> f64 {
        self.coeffs.sup_relative_error(self.interval_bound, grid_points)
    }
}

fn validate_inputs(interval_bound: f64, delta_a: f64) -> Result<()> {
    if !(interval_bound > 0.0 && interval_bound.is_finite()) {
        return Err(Error::InvalidBound(interval_bound));
    }
    if !(delta_a > 0.0 && delta_a < MAX_REL_ERROR) {
        return Err(Error::InvalidTolerance(delta_a));
    }
    Ok(())
}

/// Fits the lowest-degree Chebyshev interpolant of `exp` on
/// `[-interval_bound, interval_bound]` whose grid relative error is at most
/// `delta_a`.
pub fn fit_exp_poly(interval_bound: f64, delta_a: f64, max_degree: usize) -> Result<ExpPolynomial> {
    validate_inputs(interval_bound, delta_a)?;
    if max_degree == 0 {
        return Err(Error::InvalidArgument("max_degree must be at least 1".into()));
    }
    let grid = validation_grid(interval_bound);
    let mut best = f64::INFINITY;
    for degree in 1..=max_degree {
        let poly = chebyshev_exp_interpolant(interval_bound, degree);
        let err = grid
            .iter()
            .map(|&(x, inv)| (poly.eval(x) * inv - 1.0).abs())
            .fold(0.0, f64::max);
        if err <= delta_a {
            return Ok(ExpPolynomial {
                degree,
                interval_bound,
                target_rel_error: delta_a,
                certified_rel_error: err,
                coeffs: poly,
            });
        }
        if err.is_finite() {
            best = best.min(err);
        }
    }
    Err(Error::DegreeExhausted {
        interval_bound,
        target: delta_a,
        max_degree,
        best,
    })
}

/// The points of `sup_relative_error`'s grid paired with `e^-x`.
fn validation_grid(bound: f64) -> Vec<(f64, f64)> {
    let n = VALIDATION_GRID;
    let step = 2.0 * bound / (n - 1) as f64;
    (0..n)
        .map(|i| {
            let x = if i == n - 1 { bound } else { -bound + step * i as f64 };
            (x, (-x).exp())
        })
        .collect()
}

/// Degree-`degree` interpolant of `e^x` at the Chebyshev points of the first
/// kind on `[-bound, bound]`, in the power basis of `x`.
pub fn chebyshev_exp_interpolant(bound: f64, degree: usize) -> Polynomial {
    let nodes = degree + 1;
    let nf = nodes as f64;
    let angles: Vec<f64> = (0..nodes)
        .map(|k| std::f64::consts::PI * (k as f64 + 0.5) / nf)
        .collect();
    let values: Vec<f64> = angles.iter().map(|a| (bound * a.cos()).exp()).collect();

    // Chebyshev coefficients of t -> exp(bound * t) on [-1, 1].
    let cheb: Vec<f64> = (0..nodes)
        .map(|j| {
            let s: f64 = values
                .iter()
                .zip(&angles)
                .map(|(v, a)| v * (j as f64 * a).cos())
                .sum();
            let scale = if j == 0 { 1.0 / nf } else { 2.0 / nf };
            s * scale
        })
        .collect();

    // Accumulate sum_j cheb[j] T_j(t) in the monomial basis of t.
    let mut power = vec![0.0; nodes];
    let mut t_prev = vec![0.0; nodes];
    let mut t_cur = vec![0.0; nodes];
    t_prev[0] = 1.0;
    power[0] += cheb[0];
    if degree >= 1 {
        t_cur[1] = 1.0;
        power[1] += cheb[1];
    }
    for &coef in cheb.iter().skip(2) {
        let mut t_next = vec![0.0; nodes];
        for i in 0..nodes - 1 {
            t_next[i + 1] += 2.0 * t_cur[i];
        }
        for i in 0..nodes {
            t_next[i] -= t_prev[i];
        }
        for i in 0..nodes {
            power[i] += coef * t_next[i];
        }
        t_prev = std::mem::replace(&mut t_cur, t_next);
    }

    // Substitute t = x / bound.
    let mut scale = 1.0;
    for c in power.iter_mut() {
        *c *= scale;
        scale /= bound;
    }
    Polynomial::new(power)
}

/// Reference degree from the asymptotic bound
/// `max{s, L / ln(L / s)}` with `s = B^2 beta d` and `L = ln(1/delta_a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DegreeBound {
    pub degree: usize,
    /// Set when `L <= s`, where the second term's logarithm is non-positive
    /// and only `ceil(s)` is returned.
    pub first_term_only: bool,
}

pub fn degree_bound(scaled_bound: f64, delta_a: f64) -> Result<DegreeBound> {
    if !(scaled_bound > 0.0 && scaled_bound.is_finite()) {
        return Err(Error::InvalidBound(scaled_bound));
    }
    if !(delta_a > 0.0 && delta_a < MAX_REL_ERROR) {
        return Err(Error::InvalidTolerance(delta_a));
    }
    let log_inv = (1.0 / delta_a).ln();
    let inner = (log_inv / scaled_bound).ln();
    let (value, first_term_only) = if inner > 0.0 {
        (scaled_bound.max(log_inv / inner), false)
    } else {
        (scaled_bound, true)
    };
    Ok(DegreeBound {
        degree: (value.ceil() as usize).max(1),
        first_term_only,
    })
}
