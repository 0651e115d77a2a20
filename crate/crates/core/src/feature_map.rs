//! Explicit monomial feature maps that factor a polynomial kernel.
//!
//! For `P(x) = sum_k c_k x^k` of degree `g` the multinomial theorem gives
//!
//! ```text
//! P(<u, v>) = sum_{|a| <= g} c_{|a|} * multinomial(a) * u^a * v^a
//! ```
//!
//! so with `phi_u(u)[a] = c_{|a|} * multinomial(a) * u^a` and
//! `phi_v(v)[a] = v^a` we get `P(<u, v>) = <phi_u(u), phi_v(v)>`, and for row
//! matrices `P(X Y^T) = U1 U2^T` with rank `C(d + g, g)`.

use std::collections::HashMap;

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};

use crate::error::{Error, Result};
use crate::poly_approx::Polynomial;

/// Default cap on the number of monomials in a map.
pub const DEFAULT_RANK_CAP: usize = 1_000_000;

/// Exponent vector `a = (a_1, ..., a_d)` of a monomial `u^a`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    exponents: Vec<u32>,
}

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self { exponents }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn total_degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    /// `|a|! / (a_1! ... a_d!)`, accumulated as a product of binomials.
    pub fn multinomial(&self) -> f64 {
        let mut running = 0u32;
        let mut out = 1.0;
        for &a in &self.exponents {
            running += a;
            out *= binomial_f64(running, a);
        }
        out
    }

    /// Graded-lexicographic comparison key.
    pub fn grlex_key(&self) -> (u32, &[u32]) {
        (self.total_degree(), &self.exponents)
    }
}

fn binomial_f64(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exact binomial coefficient, `None` on `u128` overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step.
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// All `a` in `N^d` with `|a| <= g`, in graded-lexicographic order.
pub fn enumerate_multi_indices(d: usize, g: usize) -> Result<Vec<MultiIndex>> {
    enumerate_multi_indices_capped(d, g, DEFAULT_RANK_CAP)
}

pub fn enumerate_multi_indices_capped(d: usize, g: usize, cap: usize) -> Result<Vec<MultiIndex>> {
    if d == 0 {
        return Err(Error::InvalidArgument("pattern dimension must be at least 1".into()));
    }
    let count = binomial((d + g) as u64, g as u64).unwrap_or(u128::MAX);
    if count > cap as u128 {
        return Err(Error::SizeOverflow { rank: count, cap });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut current = vec![0u32; d];
    for total in 0..=g as u32 {
        compositions(&mut current, 0, total, &mut out);
    }
    Ok(out)
}

/// Pushes every way of writing `remaining` as a sum over `current[pos..]`,
/// lexicographically ascending.
fn compositions(current: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(MultiIndex::new(current.to_vec()));
        current[pos] = 0;
        return;
    }
    for a in 0..=remaining {
        current[pos] = a;
        compositions(current, pos + 1, remaining - a, out);
    }
    current[pos] = 0;
}

/// Monomial feature map realizing `P(<u, v>) = <phi_u(u), phi_v(v)>`.
#[derive(Debug, Clone)]
pub struct MonomialFeatureMap {
    d: usize,
    g: usize,
    indices: Vec<MultiIndex>,
    weights: Vec<f64>,
    // For every index past the constant one: (position of a - e_var, var).
    parents: Vec<(usize, usize)>,
}

impl MonomialFeatureMap {
    pub fn new(poly: &Polynomial, d: usize) -> Result<Self> {
        Self::with_rank_cap(poly, d, DEFAULT_RANK_CAP)
    }

    pub fn with_rank_cap(poly: &Polynomial, d: usize, cap: usize) -> Result<Self> {
        let g = poly.degree();
        let indices = enumerate_multi_indices_capped(d, g, cap)?;
        let coeffs = poly.coeffs();
        let weights = indices
            .iter()
            .map(|a| coeffs[a.total_degree() as usize] * a.multinomial())
            .collect();

        let position: HashMap<&[u32], usize> = indices
            .iter()
            .enumerate()
            .map(|(i, a)| (a.exponents(), i))
            .collect();
        let mut parents = Vec::with_capacity(indices.len().saturating_sub(1));
        let mut scratch = vec![0u32; d];
        for a in indices.iter().skip(1) {
            let var = a
                .exponents()
                .iter()
                .rposition(|&e| e > 0)
                .expect("only the constant index has zero degree");
            scratch.copy_from_slice(a.exponents());
            scratch[var] -= 1;
            parents.push((position[scratch.as_slice()], var));
        }

        Ok(Self {
            d,
            g,
            indices,
            weights,
            parents,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> usize {
        self.g
    }

    pub fn rank(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The looser rank bound `C(2(g + d), 2g)` obtained when monomials run
    /// over both argument vectors jointly.
    pub fn joint_rank_bound(&self) -> Option<u128> {
        binomial(2 * (self.g + self.d) as u64, 2 * self.g as u64)
    }

    /// Writes every monomial `x^a` into `out`, each one a single multiply
    /// away from an earlier entry.
    fn fill_monomials(&self, x: &[f64], out: &mut [f64]) {
        if out.is_empty() {
            return;
        }
        out[0] = 1.0;
        for (k, &(parent, var)) in self.parents.iter().enumerate() {
            out[k + 1] = out[parent] * x[var];
        }
    }

    fn check_dim(&self, len: usize, context: &'static str) -> Result<()> {
        if len != self.d {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.d,
                found: len,
            });
        }
        Ok(())
    }

    pub fn phi_u(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(u.len(), "phi_u")?;
        let mut out = vec![0.0; self.rank()];
        self.fill_monomials(u, &mut out);
        out.iter_mut().zip(&self.weights).for_each(|(o, w)| *o *= w);
        Ok(out)
    }

    pub fn phi_v(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(v.len(), "phi_v")?;
        let mut out = vec![0.0; self.rank()];
        self.fill_monomials(v, &mut out);
        Ok(out)
    }

    /// `U1` (rows `phi_u` of `x_rows`) and `U2` (rows `phi_v` of `y_rows`),
    /// so that `U1 U2^T = P(x_rows y_rows^T)` entrywise.
    pub fn factor_matrices(
        &self,
        x_rows: ArrayView2<'_, f64>,
        y_rows: ArrayView2<'_, f64>,
    ) -> Result<(Array2<f64>, Array2<f64>)> {
        self.check_dim(x_rows.ncols(), "factor_matrices (X columns)")?;
        self.check_dim(y_rows.ncols(), "factor_matrices (Y columns)")?;
        let mut u1 = Array2::zeros((x_rows.nrows(), self.rank()));
        let mut u2 = Array2::zeros((y_rows.nrows(), self.rank()));
        self.fill_rows(x_rows, &mut u1, true);
        self.fill_rows(y_rows, &mut u2, false);
        Ok((u1, u2))
    }

    fn fill_rows(&self, rows: ArrayView2<'_, f64>, out: &mut Array2<f64>, weighted: bool) {
        Zip::from(out.rows_mut())
            .and(rows.rows())
            .par_for_each(|mut dst, src| {
                let dst = dst
                    .as_slice_mut()
                    .expect("freshly allocated factor rows are contiguous");
                match src.as_slice() {
                    Some(src) => self.fill_monomials(src, dst),
                    None => self.fill_monomials(&src.to_vec(), dst),
                }
                if weighted {
                    dst.iter_mut().zip(&self.weights).for_each(|(o, w)| *o *= w);
                }
            });
    }
}

pub fn build_feature_map(poly: &Polynomial, d: usize) -> Result<MonomialFeatureMap> {
    MonomialFeatureMap::new(poly, d)
}

pub fn build_factor_matrices(
    map: &MonomialFeatureMap,
    x_rows: ArrayView2<'_, f64>,
    y_rows: ArrayView2<'_, f64>,
) -> Result<(Array2<f64>, Array2<f64>)> {
    map.factor_matrices(x_rows, y_rows)
}

fn check_inner(u1: ArrayView2<'_, f64>, u2: ArrayView2<'_, f64>) -> Result<()> {
    if u1.ncols() != u2.ncols() {
        return Err(Error::DimensionMismatch {
            context: "factored sums (inner dimension)",
            expected: u1.ncols(),
            found: u2.ncols(),
        });
    }
    Ok(())
}

/// `(U1 U2^T) 1` as `U1 (U2^T 1)`, without forming the product.
pub fn factored_row_sums(u1: ArrayView2<'_, f64>, u2: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
    check_inner(u1, u2)?;
    Ok(u1.dot(&u2.sum_axis(Axis(0))))
}

/// `1^T (U1 U2^T)` as `U2 (U1^T 1)`, without forming the product.
pub fn factored_col_sums(u1: ArrayView2<'_, f64>, u2: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
    check_inner(u1, u2)?;
    Ok(u2.dot(&u1.sum_axis(Axis(0))))
}
