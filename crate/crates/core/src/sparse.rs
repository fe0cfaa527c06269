//! Compressed sparse row storage, block-diagonal matrices and the small
//! amount of sparse kernel code the solvers need.

use std::io::{self, Write};
use std::ops::{Add, AddAssign, Mul};

use nalgebra::DMatrix;
use num_complex::Complex64 as c64;

use crate::error::{Error, Result};

/// Scalar types that can be stored in a [`CsrMatrix`].
pub trait Scalar:
    Copy + Default + Send + Sync + std::fmt::Debug + Add<Output = Self> + AddAssign + Mul<Output = Self> + 'static
{
    fn zero() -> Self {
        Self::default()
    }
    fn is_finite(self) -> bool;
    fn modulus(self) -> f64;
    fn conj(self) -> Self;
    fn from_real(x: f64) -> Self;
    /// Real and imaginary part, used for text export.
    fn parts(self) -> (f64, f64);
}

impl Scalar for f64 {
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn conj(self) -> Self {
        self
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn parts(self) -> (f64, f64) {
        (self, 0.0)
    }
}

impl Scalar for c64 {
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn conj(self) -> Self {
        c64::conj(&self)
    }
    fn from_real(x: f64) -> Self {
        c64::new(x, 0.0)
    }
    fn parts(self) -> (f64, f64) {
        (self.re, self.im)
    }
}

/// Row-compressed sparse matrix. Column indices within a row are sorted.
#[derive(Debug, Clone)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    /// Builds a matrix from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, T)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r},{c}) outside {nrows}x{ncols}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                row_ptr[r + 1] += 1;
                col_idx.push(c as u32);
                values.push(v);
                last = Some((r, c));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { nrows, ncols, row_ptr, col_idx, values }
    }

    /// Allocates a zero matrix whose pattern is the union of dense blocks
    /// `groups[k] x groups[k]` (element-to-dof connectivity).
    pub fn from_block_pattern(n: usize, groups: &[Vec<usize>]) -> Self {
        let mut rows: Vec<Vec<u32>> = vec![Vec::new(); n];
        for g in groups {
            for &r in g {
                rows[r].extend(g.iter().map(|&c| c as u32));
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for row in rows.iter_mut() {
            row.sort_unstable();
            row.dedup();
            col_idx.extend_from_slice(row);
            row_ptr.push(col_idx.len());
        }
        let values = vec![T::zero(); col_idx.len()];
        Self { nrows: n, ncols: n, row_ptr, col_idx, values }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n as u32).collect(),
            values: vec![T::from_real(1.0); n],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[u32], &[T]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[a..b], &self.values[a..b])
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> (&[u32], &mut [T]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[a..b], &mut self.values[a..b])
    }

    /// Adds `v` to entry (i, j), which must be in the pattern.
    pub fn add_to(&mut self, i: usize, j: usize, v: T) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        let k = self.col_idx[a..b]
            .binary_search(&(j as u32))
            .unwrap_or_else(|_| panic!("entry ({i},{j}) not in sparsity pattern"));
        self.values[a + k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&(j as u32)) {
            Ok(k) => vals[k],
            Err(_) => T::zero(),
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`, for any vector scalar that can be scaled by the matrix scalar.
    pub fn mul_vec_into<X>(&self, x: &[X], y: &mut [X])
    where
        X: Copy + Default + AddAssign + Mul<T, Output = X>,
    {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = X::default();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += x[self.col_idx[k] as usize] * self.values[k];
            }
            *yi = acc;
        }
    }

    pub fn mul_vec<X>(&self, x: &[X]) -> Vec<X>
    where
        X: Copy + Default + AddAssign + Mul<T, Output = X>,
    {
        let mut y = vec![X::default(); self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `y = A^T x` (plain transpose) or `y = A^H x` when `conjugate` is set.
    pub fn mul_transpose_into<X>(&self, x: &[X], y: &mut [X], conjugate: bool)
    where
        X: Copy + Default + AddAssign + Mul<T, Output = X>,
    {
        assert_eq!(x.len(), self.nrows);
        assert_eq!(y.len(), self.ncols);
        y.iter_mut().for_each(|v| *v = X::default());
        for (i, &xi) in x.iter().enumerate() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let a = if conjugate { self.values[k].conj() } else { self.values[k] };
                y[self.col_idx[k] as usize] += xi * a;
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<T>
    where
        T: nalgebra::Scalar,
    {
        let mut m = DMatrix::from_element(self.nrows, self.ncols, T::zero());
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                m[(i, c as usize)] += v;
            }
        }
        m
    }

    /// Largest `|i - j|` over stored entries below and above the diagonal.
    pub fn bandwidths(&self) -> (usize, usize) {
        let (mut lower, mut upper) = (0, 0);
        for i in 0..self.nrows {
            let (cols, _) = self.row(i);
            if let (Some(&first), Some(&last)) = (cols.first(), cols.last()) {
                lower = lower.max(i.saturating_sub(first as usize));
                upper = upper.max((last as usize).saturating_sub(i));
            }
        }
        (lower, upper)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> CsrMatrix<U> {
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Writes the matrix in Matrix Market coordinate format (1-based).
    pub fn write_matrix_market<W: Write>(&self, mut out: W, complex: bool) -> io::Result<()> {
        let field = if complex { "complex" } else { "real" };
        writeln!(out, "%%MatrixMarket matrix coordinate {field} general")?;
        writeln!(out, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                let (re, im) = v.parts();
                if complex {
                    writeln!(out, "{} {} {:.17e} {:.17e}", i + 1, c + 1, re, im)?;
                } else {
                    writeln!(out, "{} {} {:.17e}", i + 1, c + 1, re)?;
                }
            }
        }
        Ok(())
    }
}

impl CsrMatrix<c64> {
    /// Checks that every stored value is finite.
    pub fn check_finite(&self, context: &str) -> Result<()> {
        if self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite(context.to_string()))
        }
    }
}

/// Block-diagonal matrix with equally sized dense blocks, used for the
/// per-edge skeleton mass matrices.
#[derive(Debug, Clone)]
pub struct BlockDiagonal {
    block: usize,
    blocks: Vec<DMatrix<f64>>,
    inverses: Vec<DMatrix<f64>>,
}

impl BlockDiagonal {
    pub fn new(blocks: Vec<DMatrix<f64>>) -> Result<Self> {
        let block = blocks.first().map_or(0, |b| b.nrows());
        let inverses = blocks
            .iter()
            .enumerate()
            .map(|(k, b)| b.clone().try_inverse().ok_or(Error::SingularMatrix(k * block)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { block, blocks, inverses })
    }

    pub fn dim(&self) -> usize {
        self.block * self.blocks.len()
    }

    pub fn block_size(&self) -> usize {
        self.block
    }

    pub fn block(&self, k: usize) -> &DMatrix<f64> {
        &self.blocks[k]
    }

    pub fn inverse_block(&self, k: usize) -> &DMatrix<f64> {
        &self.inverses[k]
    }

    fn apply_blocks<X>(mats: &[DMatrix<f64>], b: usize, x: &[X], y: &mut [X])
    where
        X: Copy + Default + AddAssign + Mul<f64, Output = X>,
    {
        for (k, m) in mats.iter().enumerate() {
            let xs = &x[k * b..(k + 1) * b];
            for i in 0..b {
                let mut acc = X::default();
                for j in 0..b {
                    acc += xs[j] * m[(i, j)];
                }
                y[k * b + i] = acc;
            }
        }
    }

    pub fn apply<X>(&self, x: &[X], y: &mut [X])
    where
        X: Copy + Default + AddAssign + Mul<f64, Output = X>,
    {
        Self::apply_blocks(&self.blocks, self.block, x, y);
    }

    pub fn solve<X>(&self, x: &[X], y: &mut [X])
    where
        X: Copy + Default + AddAssign + Mul<f64, Output = X>,
    {
        Self::apply_blocks(&self.inverses, self.block, x, y);
    }

    /// Weighted inner product `sum_i conj(y_i) (M x)_i`.
    pub fn inner(&self, x: &[c64], y: &[c64]) -> c64 {
        let mut mx = vec![c64::default(); x.len()];
        self.apply(x, &mut mx);
        mx.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
    }

    /// Left-multiplies a square matrix whose dof blocks line up with this one:
    /// returns `M^{-1} A`. Rows belonging to one block must share a pattern.
    pub fn solve_matrix(&self, a: &CsrMatrix<c64>) -> CsrMatrix<c64> {
        let b = self.block;
        let mut out = a.clone();
        for k in 0..self.blocks.len() {
            let inv = &self.inverses[k];
            let (cols0, _) = a.row(k * b);
            let width = cols0.len();
            for i in 0..b {
                let (cols_i, _) = a.row(k * b + i);
                debug_assert_eq!(cols_i, cols0, "rows of a block must share a pattern");
            }
            for i in 0..b {
                let (_, vals) = out.row_mut(k * b + i);
                for c in 0..width {
                    let mut acc = c64::default();
                    for j in 0..b {
                        acc += a.row(k * b + j).1[c] * inv[(i, j)];
                    }
                    vals[c] = acc;
                }
            }
        }
        out
    }
}
