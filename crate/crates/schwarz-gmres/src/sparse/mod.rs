//! Sparse and small-dense linear algebra kernels.
//!
//! Everything downstream (assembly, Schwarz preconditioners, Krylov solvers)
//! is built on [`CsrMatrix`], [`DenseVector`] and the direct solver in
//! [`lu`]. Matrix-vector products use a fixed row-major accumulation order so
//! that iteration counts are reproducible run to run.

mod lu;
mod market;

pub use lu::LuFactors;
pub use market::{read_matrix_market, write_matrix_market};

use crate::error::{Error, Result};
use std::ops::{Deref, DerefMut};

/// Dense column vector of `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    pub fn zeros(n: usize) -> Self {
        DenseVector(vec![0.0; n])
    }

    pub fn from_vec(values: Vec<f64>) -> Self {
        DenseVector(values)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &DenseVector) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.iter().zip(other.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &DenseVector) {
        debug_assert_eq!(self.len(), x.len());
        for (s, xi) in self.0.iter_mut().zip(x.iter()) {
            *s += a * xi;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for s in self.0.iter_mut() {
            *s *= a;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }
}

impl Deref for DenseVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for DenseVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for DenseVector {
    fn from(v: Vec<f64>) -> Self {
        DenseVector(v)
    }
}

/// Compressed sparse row matrix.
///
/// Invariants: `row_offsets` is nondecreasing with `nrows + 1` entries and
/// `row_offsets[nrows] == values.len()`; within each row the column indices
/// are strictly increasing; no duplicate `(row, col)` pairs are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a CSR matrix from triplets. Duplicate entries are summed in
    /// insertion order, which keeps assembly deterministic.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> CsrMatrix {
        for &(r, c, _) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
        }
        // Stable sort by (row, col) keeps duplicates in insertion order, so
        // the per-entry summation order is fixed.
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));

        let mut row_offsets = vec![0usize; nrows + 1];
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for &k in &order {
            let (r, c, v) = triplets[k];
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                row_offsets[r + 1] += 1;
                col_indices.push(c);
                values.push(v);
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            row_offsets[r + 1] += row_offsets[r];
        }
        CsrMatrix {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn identity(n: usize) -> CsrMatrix {
        CsrMatrix {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
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

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Entries of row `r` as `(col, value)` pairs, columns ascending.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_offsets[r];
        let hi = self.row_offsets[r + 1];
        self.col_indices[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let lo = self.row_offsets[r];
        let hi = self.row_offsets[r + 1];
        match self.col_indices[lo..hi].binary_search(&c) {
            Ok(k) => self.values[lo + k],
            Err(_) => 0.0,
        }
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut row_offsets = vec![0usize; self.ncols + 1];
        for &c in &self.col_indices {
            row_offsets[c + 1] += 1;
        }
        for c in 0..self.ncols {
            row_offsets[c + 1] += row_offsets[c];
        }
        let mut col_indices = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        let mut cursor = row_offsets.clone();
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                let slot = cursor[c];
                col_indices[slot] = r;
                values[slot] = v;
                cursor[c] += 1;
            }
        }
        CsrMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            row_offsets,
            col_indices,
            values,
        }
    }

    /// Principal submatrix on the given sorted global index set.
    pub fn principal_submatrix(&self, indices: &[usize]) -> CsrMatrix {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        let mut local_of = vec![usize::MAX; self.ncols.max(self.nrows)];
        for (loc, &glob) in indices.iter().enumerate() {
            local_of[glob] = loc;
        }
        let mut triplets = Vec::new();
        for (loc_r, &glob_r) in indices.iter().enumerate() {
            for (c, v) in self.row(glob_r) {
                let loc_c = local_of[c];
                if loc_c != usize::MAX {
                    triplets.push((loc_r, loc_c, v));
                }
            }
        }
        CsrMatrix::from_triplets(indices.len(), indices.len(), &triplets)
    }

    /// Checks the CSR structural invariants.
    pub fn validate(&self) -> Result<()> {
        if self.row_offsets.len() != self.nrows + 1 {
            return Err(Error::Format("row_offsets length".into()));
        }
        if *self.row_offsets.last().unwrap() != self.values.len()
            || self.col_indices.len() != self.values.len()
        {
            return Err(Error::Format("offset/value count mismatch".into()));
        }
        for r in 0..self.nrows {
            let lo = self.row_offsets[r];
            let hi = self.row_offsets[r + 1];
            if lo > hi {
                return Err(Error::Format("row_offsets not nondecreasing".into()));
            }
            let cols = &self.col_indices[lo..hi];
            if cols.iter().any(|&c| c >= self.ncols) {
                return Err(Error::Format("column index out of range".into()));
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Format("columns not strictly increasing".into()));
            }
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &CsrMatrix) -> f64 {
        assert_eq!(self.nrows, other.nrows);
        assert_eq!(self.ncols, other.ncols);
        let mut max = 0.0f64;
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                max = max.max((v - other.get(r, c)).abs());
            }
            for (c, v) in other.row(r) {
                max = max.max((v - self.get(r, c)).abs());
            }
        }
        max
    }

    /// `self + sign * other`, entrywise over the union pattern.
    pub fn add_scaled(&self, sign: f64, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!(self.nrows, other.nrows);
        assert_eq!(self.ncols, other.ncols);
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                triplets.push((r, c, v));
            }
            for (c, v) in other.row(r) {
                triplets.push((r, c, sign * v));
            }
        }
        CsrMatrix::from_triplets(self.nrows, self.ncols, &triplets)
    }
}

/// `M * v`, accumulated row by row in stored column order.
pub fn spmv(m: &CsrMatrix, v: &DenseVector) -> Result<DenseVector> {
    if m.ncols != v.len() {
        return Err(Error::DimensionMismatch {
            context: "spmv",
            expected: m.ncols,
            got: v.len(),
        });
    }
    let mut out = DenseVector::zeros(m.nrows);
    for r in 0..m.nrows {
        let lo = m.row_offsets[r];
        let hi = m.row_offsets[r + 1];
        let mut acc = 0.0;
        for k in lo..hi {
            acc += m.values[k] * v[m.col_indices[k]];
        }
        out[r] = acc;
    }
    debug_assert!(out.is_finite());
    Ok(out)
}

/// `M^T * v` without forming the transpose; scatter order follows the rows
/// of `M`, so results are reproducible.
pub fn spmv_transpose(m: &CsrMatrix, v: &DenseVector) -> Result<DenseVector> {
    if m.nrows != v.len() {
        return Err(Error::DimensionMismatch {
            context: "spmv_transpose",
            expected: m.nrows,
            got: v.len(),
        });
    }
    let mut out = DenseVector::zeros(m.ncols);
    for r in 0..m.nrows {
        let vr = v[r];
        let lo = m.row_offsets[r];
        let hi = m.row_offsets[r + 1];
        for k in lo..hi {
            out[m.col_indices[k]] += m.values[k] * vr;
        }
    }
    debug_assert!(out.is_finite());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn example_2x2() -> CsrMatrix {
        CsrMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 1, 3.0)])
    }

    fn random_csr(rng: &mut ChaCha8Rng, n: usize, fill: f64) -> CsrMatrix {
        let mut triplets = Vec::new();
        for r in 0..n {
            // keep the diagonal so the matrix stays structurally nonsingular
            triplets.push((r, r, rng.gen_range(1.0..2.0)));
            for c in 0..n {
                if c != r && rng.gen_bool(fill) {
                    triplets.push((r, c, rng.gen_range(-1.0..1.0)));
                }
            }
        }
        CsrMatrix::from_triplets(n, n, &triplets)
    }

    #[test]
    fn spmv_identity() {
        let id = CsrMatrix::identity(3);
        let v = DenseVector::from_vec(vec![1.0, 2.0, 3.0]);
        assert_eq!(spmv(&id, &v).unwrap().deref(), v.deref());
    }

    #[test]
    fn spmv_zero_matrix() {
        let z = CsrMatrix::from_triplets(3, 3, &[]);
        let v = DenseVector::from_vec(vec![4.0, -1.0, 7.0]);
        assert_eq!(spmv(&z, &v).unwrap().deref(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn spmv_hand_computed() {
        let m = example_2x2();
        let v = DenseVector::from_vec(vec![1.0, 1.0]);
        assert_eq!(spmv(&m, &v).unwrap().deref(), &[3.0, 3.0]);
    }

    #[test]
    fn spmv_dimension_mismatch() {
        let m = example_2x2();
        let v = DenseVector::zeros(3);
        assert!(spmv(&m, &v).is_err());
        assert!(spmv_transpose(&m, &v).is_err());
    }

    #[test]
    fn spmv_transpose_hand_computed() {
        let m = example_2x2();
        let v = DenseVector::from_vec(vec![1.0, 1.0]);
        assert_eq!(spmv_transpose(&m, &v).unwrap().deref(), &[2.0, 4.0]);
    }

    #[test]
    fn spmv_transpose_matches_explicit_transpose() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = random_csr(&mut rng, 5, 0.4);
        let t = m.transpose();
        t.validate().unwrap();
        let v = DenseVector::from_vec((0..5).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let a = spmv_transpose(&m, &v).unwrap();
        let b = spmv(&t, &v).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() <= 1e-14 * x.abs().max(1.0));
        }
    }

    #[test]
    fn adjoint_identity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let n = rng.gen_range(2..12);
            let m = random_csr(&mut rng, n, 0.3);
            let v = DenseVector::from_vec((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
            let w = DenseVector::from_vec((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
            let lhs = w.dot(&spmv(&m, &v).unwrap());
            let rhs = v.dot(&spmv_transpose(&m, &w).unwrap());
            let scale: f64 = m.values().iter().map(|x| x.abs()).sum::<f64>()
                * v.norm()
                * w.norm();
            assert!((lhs - rhs).abs() <= 1e-13 * scale.max(1.0));
        }
    }

    #[test]
    fn from_triplets_sums_duplicates_and_validates() {
        let m = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.5), (1, 0, -1.0)]);
        m.validate().unwrap();
        assert_eq!(m.get(0, 0), 3.5);
        assert_eq!(m.get(1, 0), -1.0);
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn principal_submatrix_picks_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_csr(&mut rng, 6, 0.5);
        let idx = [1usize, 3, 4];
        let sub = m.principal_submatrix(&idx);
        sub.validate().unwrap();
        for (i, &gi) in idx.iter().enumerate() {
            for (j, &gj) in idx.iter().enumerate() {
                assert_eq!(sub.get(i, j), m.get(gi, gj));
            }
        }
    }
}
