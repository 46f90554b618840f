//! Sparse symmetric operators in compressed-row form.
//!
//! Both mirror entries of every off-diagonal element are stored, so a
//! matrix-vector product is a plain row sweep. Rows are sorted by column
//! and the product accumulates in that order; with a fixed input the
//! result is bit-reproducible (the deterministic-reduction contract the
//! solvers rely on).

use crate::error::{PtError, Result};
use crate::real::Real;

/// Symmetric sparse matrix with O(1) access to the full diagonal.
#[derive(Clone, Debug)]
pub struct SparseSymmetricOperator<T> {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
    diag: Vec<T>,
    bandwidth_hint: Option<usize>,
}

impl<T: Real> SparseSymmetricOperator<T> {
    /// Build from triplets. Each triplet `(i, j, v)` with `i != j` also
    /// stores the mirror `(j, i, v)`; duplicates accumulate by summation.
    /// Exact zeros are dropped.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, T)]) -> Result<Self> {
        if dim == 0 {
            return Err(PtError::DimensionTooSmall { dim: 0, min: 1 });
        }
        let mut per_row: Vec<Vec<(usize, T)>> = vec![Vec::new(); dim];
        for &(i, j, v) in triplets {
            if i >= dim {
                return Err(PtError::IndexOutOfRange { index: i, dim });
            }
            if j >= dim {
                return Err(PtError::IndexOutOfRange { index: j, dim });
            }
            per_row[i].push((j, v));
            if i != j {
                per_row[j].push((i, v));
            }
        }
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut diag = vec![T::ZERO; dim];
        row_ptr.push(0);
        for (i, row) in per_row.iter_mut().enumerate() {
            row.sort_by_key(|&(j, _)| j);
            let mut idx = 0;
            while idx < row.len() {
                let j = row[idx].0;
                let mut v = row[idx].1;
                idx += 1;
                while idx < row.len() && row[idx].0 == j {
                    v += row[idx].1;
                    idx += 1;
                }
                if v == T::ZERO {
                    continue;
                }
                if j == i {
                    diag[i] = v;
                }
                col_idx.push(j);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            dim,
            row_ptr,
            col_idx,
            values,
            diag,
            bandwidth_hint: None,
        })
    }

    /// All-zero operator of the given dimension.
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: vec![0; dim + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
            diag: vec![T::ZERO; dim],
            bandwidth_hint: Some(0),
        }
    }

    /// Identity operator.
    pub fn identity(dim: usize) -> Self {
        let triplets: Vec<(usize, usize, T)> = (0..dim).map(|i| (i, i, T::ONE)).collect();
        let mut op = Self::from_triplets(dim, &triplets).expect("identity triplets are valid");
        op.bandwidth_hint = Some(0);
        op
    }

    pub fn with_bandwidth_hint(mut self, bw: usize) -> Self {
        self.bandwidth_hint = Some(bw);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Full diagonal, including exact zeros.
    pub fn diag(&self) -> &[T] {
        &self.diag
    }

    pub fn bandwidth_hint(&self) -> Option<usize> {
        self.bandwidth_hint
    }

    /// Largest |i - j| over stored entries.
    pub fn bandwidth(&self) -> usize {
        let mut bw = 0;
        for i in 0..self.dim {
            for &j in &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]] {
                bw = bw.max(i.abs_diff(j));
            }
        }
        bw
    }

    /// Stored entries of row `i`, sorted by column.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col_idx[lo..hi]
            .iter()
            .zip(&self.values[lo..hi])
            .map(|(&j, &v)| (j, v))
    }

    /// Entry lookup by binary search within the row; zero if absent.
    pub fn entry(&self, i: usize, j: usize) -> T {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(pos) => self.values[lo + pos],
            Err(_) => T::ZERO,
        }
    }

    /// Largest number of stored entries in any row.
    pub fn max_row_nnz(&self) -> usize {
        (0..self.dim)
            .map(|i| self.row_ptr[i + 1] - self.row_ptr[i])
            .max()
            .unwrap_or(0)
    }

    /// `y = A x`, accumulated row by row in stored (column) order.
    pub fn matvec_into(&self, x: &[T], y: &mut [T]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for i in 0..self.dim {
            let mut acc = T::ZERO;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::ZERO; self.dim];
        self.matvec_into(x, &mut y);
        y
    }

    /// Dot product of row `i` with `x` (same accumulation order as `matvec`).
    pub fn row_dot(&self, i: usize, x: &[T]) -> T {
        let mut acc = T::ZERO;
        for k in self.row_ptr[i]..self.row_ptr[i + 1] {
            acc += self.values[k] * x[self.col_idx[k]];
        }
        acc
    }

    /// Upper-triangle triplets (i <= j), row-major.
    pub fn to_upper_triplets(&self) -> Vec<(usize, usize, T)> {
        let mut out = Vec::new();
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                if j >= i {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    /// Scaled copy `c * A`.
    pub fn scale(&self, c: T) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v = c * *v;
        }
        for d in &mut out.diag {
            *d = c * *d;
        }
        out
    }

    /// Copy with the diagonal removed (exactly zero diagonal).
    pub fn without_diagonal(&self) -> Self {
        let triplets: Vec<(usize, usize, T)> = self
            .to_upper_triplets()
            .into_iter()
            .filter(|&(i, j, _)| i != j)
            .collect();
        let mut op = Self::from_triplets(self.dim, &triplets).expect("triplets from valid matrix");
        op.bandwidth_hint = self.bandwidth_hint;
        op
    }

    /// Copy with the diagonal replaced by `new_diag`.
    pub fn with_diagonal(&self, new_diag: &[T]) -> Result<Self> {
        if new_diag.len() != self.dim {
            return Err(PtError::DimensionMismatch {
                left: new_diag.len(),
                right: self.dim,
            });
        }
        let mut triplets: Vec<(usize, usize, T)> = self
            .to_upper_triplets()
            .into_iter()
            .filter(|&(i, j, _)| i != j)
            .collect();
        for (i, &d) in new_diag.iter().enumerate() {
            triplets.push((i, i, d));
        }
        let mut op = Self::from_triplets(self.dim, &triplets)?;
        op.bandwidth_hint = self.bandwidth_hint;
        Ok(op)
    }

    /// Entrywise sum; dimensions must match.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(PtError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let mut triplets = self.to_upper_triplets();
        triplets.extend(other.to_upper_triplets());
        Self::from_triplets(self.dim, &triplets)
    }

    /// True when every stored diagonal entry is exactly zero.
    pub fn has_zero_diagonal(&self) -> bool {
        self.diag.iter().all(|&d| d == T::ZERO)
    }

    /// Verify that every stored entry has an equal mirror.
    pub fn check_symmetric(&self) -> Result<()> {
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                if self.entry(j, i) != v {
                    return Err(PtError::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    /// Dense copy with entries converted to `f64` (oracle input).
    pub fn to_dense_f64(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.dim]; self.dim];
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                dense[i][j] = v.to_f64();
            }
        }
        dense
    }

    /// Entrywise conversion to another scalar type (exact for `f64` sources).
    pub fn convert<U: Real>(&self) -> SparseSymmetricOperator<U> {
        SparseSymmetricOperator {
            dim: self.dim,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: self
                .values
                .iter()
                .map(|v| U::from_f64(v.to_f64()))
                .collect(),
            diag: self.diag.iter().map(|v| U::from_f64(v.to_f64())).collect(),
            bandwidth_hint: self.bandwidth_hint,
        }
    }
}
