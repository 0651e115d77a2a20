//! Pattern matrices and their on-disk formats.
//!
//! Two formats are supported:
//!
//! * CSV: a `dim=<d>` header line, then one pattern per line as `d`
//!   comma-separated numbers.
//! * Binary: a 16-byte header (`b"AHOP"`, little-endian `u32` dimension,
//!   little-endian `u32` pattern count, 4 zero bytes) followed by the
//!   patterns one after another as little-endian `f64`.

use std::io::{BufRead, Read, Write};

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BINARY_MAGIC: &[u8; 4] = b"AHOP";
pub const BINARY_HEADER_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Memory,
    Query,
}

/// A collection of `N` patterns in `R^d`, viewed as the `d x N` matrix whose
/// columns are the patterns.
///
/// Patterns are stored contiguously (one per row of an `N x d` array); the
/// cached `max_norm` is the largest absolute entry.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternMatrix {
    rows: Array2<f64>,
    max_norm: f64,
    role: Role,
}

impl PatternMatrix {
    /// Builds from an `N x d` array holding one pattern per row.
    pub fn from_rows(rows: Array2<f64>, role: Role) -> Result<Self> {
        if rows.ncols() == 0 {
            return Err(Error::InvalidArgument("pattern dimension must be at least 1".into()));
        }
        if rows.nrows() == 0 && role == Role::Memory {
            return Err(Error::InvalidArgument("a memory needs at least one pattern".into()));
        }
        if rows.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("patterns must be finite".into()));
        }
        let rows = rows.as_standard_layout().into_owned();
        let max_norm = rows.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(Self { rows, max_norm, role })
    }

    /// Builds from a `d x N` array whose columns are the patterns.
    pub fn from_columns(columns: Array2<f64>, role: Role) -> Result<Self> {
        Self::from_rows(columns.reversed_axes(), role)
    }

    pub fn from_patterns(patterns: &[Vec<f64>], role: Role) -> Result<Self> {
        let d = patterns.first().map_or(0, Vec::len);
        if patterns.iter().any(|p| p.len() != d) {
            return Err(Error::InvalidArgument("patterns have differing lengths".into()));
        }
        let flat: Vec<f64> = patterns.iter().flatten().copied().collect();
        let rows = Array2::from_shape_vec((patterns.len(), d), flat)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Self::from_rows(rows, role)
    }

    /// Empty query batch of dimension `d`.
    pub fn empty_queries(d: usize) -> Result<Self> {
        Self::from_rows(Array2::zeros((0, d)), Role::Query)
    }

    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }

    pub fn len(&self) -> usize {
        self.rows.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.nrows() == 0
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    /// Largest absolute entry, `B`.
    pub fn max_norm(&self) -> f64 {
        self.max_norm
    }

    /// Largest Euclidean pattern norm, `m`.
    pub fn max_pattern_norm(&self) -> f64 {
        self.rows
            .rows()
            .into_iter()
            .map(|r| r.dot(&r).sqrt())
            .fold(0.0, f64::max)
    }

    pub fn pattern(&self, index: usize) -> &[f64] {
        self.rows
            .row(index)
            .to_slice()
            .expect("pattern rows are stored contiguously")
    }

    pub fn pattern_view(&self, index: usize) -> ArrayView1<'_, f64> {
        self.rows.row(index)
    }

    pub fn patterns(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.len()).map(move |i| self.pattern(i))
    }

    /// `N x d` view, one pattern per row.
    pub fn rows(&self) -> ArrayView2<'_, f64> {
        self.rows.view()
    }

    /// `d x N` view, one pattern per column.
    pub fn columns(&self) -> ArrayView2<'_, f64> {
        self.rows.t()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::from_rows(&self.rows * factor, self.role)
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.len() {
            return Err(Error::IndexOutOfRange { index, count: self.len() });
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "dim={}", self.dim())?;
        for row in self.rows.axis_iter(Axis(0)) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R, role: Role) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("missing `dim=<d>` header".into()))??;
        let d: usize = header
            .trim()
            .strip_prefix("dim=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::Format(format!("bad header line {header:?}")))?;
        let mut flat = Vec::new();
        let mut count = 0;
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let values: Vec<f64> = line
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 2)))?;
            if values.len() != d {
                return Err(Error::Format(format!(
                    "line {}: expected {d} values, found {}",
                    lineno + 2,
                    values.len()
                )));
            }
            flat.extend(values);
            count += 1;
        }
        let rows = Array2::from_shape_vec((count, d), flat).map_err(|e| Error::Format(e.to_string()))?;
        Self::from_rows(rows, role)
    }

    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        let d = u32::try_from(self.dim()).map_err(|_| Error::Format("dimension exceeds u32".into()))?;
        let n = u32::try_from(self.len()).map_err(|_| Error::Format("pattern count exceeds u32".into()))?;
        out.write_all(BINARY_MAGIC)?;
        out.write_all(&d.to_le_bytes())?;
        out.write_all(&n.to_le_bytes())?;
        out.write_all(&[0u8; 4])?;
        for v in self.rows.iter() {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R, role: Role) -> Result<Self> {
        let mut header = [0u8; BINARY_HEADER_LEN];
        input.read_exact(&mut header)?;
        if &header[..4] != BINARY_MAGIC {
            return Err(Error::Format("bad magic, expected AHOP".into()));
        }
        let d = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
        let n = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
        let mut buf = Vec::new();
        input.read_to_end(&mut buf)?;
        if buf.len() != n * d * 8 {
            return Err(Error::Format(format!(
                "expected {} payload bytes for {n} x {d}, found {}",
                n * d * 8,
                buf.len()
            )));
        }
        let flat: Vec<f64> = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let rows = Array2::from_shape_vec((n, d), flat).map_err(|e| Error::Format(e.to_string()))?;
        Self::from_rows(rows, role)
    }
}
