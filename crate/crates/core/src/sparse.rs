//! Compressed-row complex sparse matrices.
//!
//! Assembly goes through [`SparseOperator::from_triplets`], which sums
//! duplicate entries and drops exact zeros, so every stored `(row, col)` pair
//! is unique and nonzero. Rows are stored with strictly increasing column
//! indices, which makes every product below deterministic.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{DickeError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl SparseOperator {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, indptr: vec![0; rows + 1], indices: Vec::new(), values: Vec::new() }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![C64::new(1.0, 0.0); dim])
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        Self::from_triplets(
            diag.len(),
            diag.len(),
            diag.iter().enumerate().map(|(i, &v)| (i, i, v)),
        )
    }

    /// Assemble from `(row, col, value)` triplets in any order.
    ///
    /// Panics if an index is out of bounds.
    pub fn from_triplets<I>(rows: usize, cols: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let mut entries: Vec<(usize, usize, C64)> = triplets.into_iter().collect();
        for &(r, c, _) in &entries {
            assert!(r < rows && c < cols, "triplet ({r}, {c}) outside {rows}x{cols}");
        }
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut k = 0;
        while k < entries.len() {
            let (r, c, mut v) = entries[k];
            k += 1;
            while k < entries.len() && entries[k].0 == r && entries[k].1 == c {
                v += entries[k].2;
                k += 1;
            }
            if v != C64::new(0.0, 0.0) {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
            }
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        Self { rows, cols, indptr, indices, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterate stored entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            (self.indptr[r]..self.indptr[r + 1]).map(move |k| (r, self.indices[k], self.values[k]))
        })
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        (self.indptr[r]..self.indptr[r + 1]).map(move |k| (self.indices[k], self.values[k]))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let span = self.indptr[r]..self.indptr[r + 1];
        match self.indices[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// `y = A x`
    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            *yr = acc;
        }
    }

    /// `y += alpha A x`
    pub fn matvec_add(&self, alpha: C64, x: &[C64], y: &mut [C64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            *yr += alpha * acc;
        }
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.rows];
        self.matvec_into(x, &mut y);
        y
    }

    /// `<x|A|x>` without allocating.
    pub fn expectation(&self, x: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..self.rows {
            let mut row = C64::new(0.0, 0.0);
            for k in self.indptr[r]..self.indptr[r + 1] {
                row += self.values[k] * x[self.indices[k]];
            }
            acc += x[r].conj() * row;
        }
        acc
    }

    /// `tr(A rho)` for a dense column-major `rho`.
    pub fn trace_product(&self, rho: &DMatrix<C64>) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (r, c, v) in self.triplets() {
            acc += v * rho[(c, r)];
        }
        acc
    }

    /// `A rho` with `rho` dense, applied column by column.
    pub fn mul_dense(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(self.rows, rho.ncols());
        for j in 0..rho.ncols() {
            let x = rho.column(j);
            let mut y = out.column_mut(j);
            for r in 0..self.rows {
                let mut acc = C64::new(0.0, 0.0);
                for k in self.indptr[r]..self.indptr[r + 1] {
                    acc += self.values[k] * x[self.indices[k]];
                }
                y[r] = acc;
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.cols, self.rows, self.triplets().map(|(r, c, v)| (c, r, v.conj())))
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.cols, self.rows, self.triplets().map(|(r, c, v)| (c, r, v)))
    }

    pub fn scale(&self, alpha: C64) -> Self {
        Self::from_triplets(self.rows, self.cols, self.triplets().map(|(r, c, v)| (r, c, alpha * v)))
    }

    /// `alpha A + beta B`
    pub fn add_scaled(&self, alpha: C64, other: &Self, beta: C64) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_triplets(
            self.rows,
            self.cols,
            self.triplets()
                .map(|(r, c, v)| (r, c, alpha * v))
                .chain(other.triplets().map(|(r, c, v)| (r, c, beta * v))),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let one = C64::new(1.0, 0.0);
        self.add_scaled(one, other, one)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(C64::new(1.0, 0.0), other, C64::new(-1.0, 0.0))
    }

    /// Sparse-sparse product `A B`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut acc = vec![C64::new(0.0, 0.0); other.cols];
        let mut touched = vec![false; other.cols];
        let mut cols_hit: Vec<usize> = Vec::new();
        let mut trip = Vec::new();
        for r in 0..self.rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let (mid, a) = (self.indices[k], self.values[k]);
                for kk in other.indptr[mid]..other.indptr[mid + 1] {
                    let c = other.indices[kk];
                    if !touched[c] {
                        touched[c] = true;
                        cols_hit.push(c);
                    }
                    acc[c] += a * other.values[kk];
                }
            }
            cols_hit.sort_unstable();
            for &c in &cols_hit {
                trip.push((r, c, acc[c]));
                acc[c] = C64::new(0.0, 0.0);
                touched[c] = false;
            }
            cols_hit.clear();
        }
        Self::from_triplets(self.rows, other.cols, trip)
    }

    /// `[A, B] = AB - BA`
    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    /// Largest elementwise modulus.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).max_abs()
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.rows == self.cols && self.hermiticity_error() <= tol
    }

    /// Diagonal entries as a dense vector (zeros where nothing is stored).
    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    /// Upper bound on the 2-norm: `sqrt(||A||_1 ||A||_inf)`.
    pub fn norm_bound(&self) -> f64 {
        let mut col_sums = vec![0.0; self.cols];
        let mut max_row: f64 = 0.0;
        for r in 0..self.rows {
            let mut s = 0.0;
            for (c, v) in self.row(r) {
                s += v.norm();
                col_sums[c] += v.norm();
            }
            max_row = max_row.max(s);
        }
        let max_col = col_sums.into_iter().fold(0.0, f64::max);
        (max_row * max_col).sqrt()
    }

    /// Text triplet format: a `rows cols nnz` header, then one
    /// `row col re im` line per stored entry, row-major.
    pub fn write_triplets<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {} {}", self.rows, self.cols, self.nnz())?;
        for (r, c, v) in self.triplets() {
            writeln!(w, "{} {} {:.16e} {:.16e}", r, c, v.re, v.im)?;
        }
        Ok(())
    }

    pub fn read_triplets<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| DickeError::Parse("empty triplet file".into()))??;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| DickeError::Parse(format!("bad header `{header}`: {e}")))?;
        let [rows, cols, nnz] = dims[..] else {
            return Err(DickeError::Parse(format!("bad header `{header}`")));
        };
        let mut trip = Vec::with_capacity(nnz);
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let tok: Vec<&str> = line.split_whitespace().collect();
            if tok.len() != 4 {
                return Err(DickeError::Parse(format!("bad triplet line `{line}`")));
            }
            let bad = |e: String| DickeError::Parse(format!("bad triplet line `{line}`: {e}"));
            let r: usize = tok[0].parse().map_err(|e| bad(format!("{e}")))?;
            let c: usize = tok[1].parse().map_err(|e| bad(format!("{e}")))?;
            let re: f64 = tok[2].parse().map_err(|e| bad(format!("{e}")))?;
            let im: f64 = tok[3].parse().map_err(|e| bad(format!("{e}")))?;
            if r >= rows || c >= cols {
                return Err(bad("index out of range".into()));
            }
            trip.push((r, c, C64::new(re, im)));
        }
        if trip.len() != nnz {
            return Err(DickeError::Parse(format!("header says {nnz} entries, found {}", trip.len())));
        }
        Ok(Self::from_triplets(rows, cols, trip))
    }
}
