//! Compressed-row sparse matrices with coordinate staging.

use std::io::{self, Write};

use faer::Mat;

/// Coordinate-format staging area; duplicates are summed on finalization.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, entries: Vec::new() }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        Self { nrows, ncols, entries: Vec::with_capacity(cap) }
    }

    #[inline]
    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.nrows && j < self.ncols, "entry ({i},{j}) out of bounds");
        self.entries.push((i, j, v));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn build(self) -> SparseMatrix {
        SparseMatrix::from_triplets(self.nrows, self.ncols, self.entries)
    }
}

/// Real CSR matrix. Column indices are sorted and unique within each row and
/// explicit zeros are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, indptr: vec![0; nrows + 1], indices: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        indptr.push(0);
        for (i, &v) in d.iter().enumerate() {
            if v != 0.0 {
                indices.push(i);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Self { nrows: n, ncols: n, indptr, indices, values }
    }

    /// Sums duplicate entries; entries that sum to exactly zero are dropped.
    /// Accumulation within a (row, col) slot follows insertion order.
    pub fn from_triplets(nrows: usize, ncols: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.sort_by_key(|e| (e.0, e.1));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut k = 0;
        while k < entries.len() {
            let (i, j, mut v) = entries[k];
            assert!(i < nrows && j < ncols, "entry ({i},{j}) outside {nrows}x{ncols}");
            k += 1;
            while k < entries.len() && entries[k].0 == i && entries[k].1 == j {
                v += entries[k].2;
                k += 1;
            }
            if v != 0.0 {
                indices.push(j);
                values.push(v);
                indptr[i + 1] += 1;
            }
        }
        for i in 0..nrows {
            indptr[i + 1] += indptr[i];
        }
        Self { nrows, ncols, indptr, indices, values }
    }

    /// Keeps entries with `|a_ij| > drop_tol`.
    pub fn from_dense(a: &Mat<f64>, drop_tol: f64) -> Self {
        let mut indptr = Vec::with_capacity(a.nrows() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                let v = a[(i, j)];
                if v.abs() > drop_tol {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self { nrows: a.nrows(), ncols: a.ncols(), indptr, indices, values }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Nonzeros of row `i` as `(column, value)` pairs in column order.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.indptr[i]..self.indptr[i + 1];
        match self.indices[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols, "mul_vec: dimension mismatch");
        assert_eq!(y.len(), self.nrows, "mul_vec: output dimension mismatch");
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.indptr[i]..self.indptr[i + 1] {
                s += self.values[k] * x[self.indices[k]];
            }
            *yi = s;
        }
    }

    /// `y = Aᵀ x`.
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows, "tr_mul_vec: dimension mismatch");
        let mut y = vec![0.0; self.ncols];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for k in self.indptr[i]..self.indptr[i + 1] {
                y[self.indices[k]] += self.values[k] * xi;
            }
        }
        y
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let indptr = counts.clone();
        let mut next = counts;
        let mut indices = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                let j = self.indices[k];
                let dst = next[j];
                indices[dst] = i;
                values[dst] = self.values[k];
                next[j] += 1;
            }
        }
        Self { nrows: self.ncols, ncols: self.nrows, indptr, indices, values }
    }

    /// Sparse product `self * rhs` (row-wise Gustavson with a dense accumulator).
    pub fn matmul(&self, rhs: &SparseMatrix) -> Self {
        assert_eq!(self.ncols, rhs.nrows, "matmul: inner dimensions differ");
        let mut acc = vec![0.0; rhs.ncols];
        let mut mark = vec![usize::MAX; rhs.ncols];
        let mut cols: Vec<usize> = Vec::new();
        let mut indptr = Vec::with_capacity(self.nrows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for i in 0..self.nrows {
            cols.clear();
            for (k, a) in self.row(i) {
                for (j, b) in rhs.row(k) {
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = 0.0;
                        cols.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            cols.sort_unstable();
            for &j in &cols {
                if acc[j] != 0.0 {
                    indices.push(j);
                    values.push(acc[j]);
                }
            }
            indptr.push(indices.len());
        }
        Self { nrows: self.nrows, ncols: rhs.ncols, indptr, indices, values }
    }

    /// `a * self + b * other`.
    pub fn lin_comb(a: f64, x: &SparseMatrix, b: f64, y: &SparseMatrix) -> Self {
        assert_eq!(x.shape(), y.shape(), "lin_comb: shapes differ");
        let mut indptr = Vec::with_capacity(x.nrows + 1);
        let mut indices = Vec::with_capacity(x.nnz() + y.nnz());
        let mut values = Vec::with_capacity(x.nnz() + y.nnz());
        indptr.push(0);
        for i in 0..x.nrows {
            let (mut p, pe) = (x.indptr[i], x.indptr[i + 1]);
            let (mut q, qe) = (y.indptr[i], y.indptr[i + 1]);
            while p < pe || q < qe {
                let jp = if p < pe { x.indices[p] } else { usize::MAX };
                let jq = if q < qe { y.indices[q] } else { usize::MAX };
                let (j, v) = if jp == jq {
                    let v = a * x.values[p] + b * y.values[q];
                    p += 1;
                    q += 1;
                    (jp, v)
                } else if jp < jq {
                    p += 1;
                    (jp, a * x.values[p - 1])
                } else {
                    q += 1;
                    (jq, b * y.values[q - 1])
                };
                if v != 0.0 {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self { nrows: x.nrows, ncols: x.ncols, indptr, indices, values }
    }

    pub fn add(&self, other: &SparseMatrix) -> Self {
        Self::lin_comb(1.0, self, 1.0, other)
    }

    pub fn sub(&self, other: &SparseMatrix) -> Self {
        Self::lin_comb(1.0, self, -1.0, other)
    }

    pub fn scale(&self, s: f64) -> Self {
        if s == 0.0 {
            return Self::zeros(self.nrows, self.ncols);
        }
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// Kronecker product; the index of `(i, j)` is `i * b.nrows() + j`.
    pub fn kron(a: &SparseMatrix, b: &SparseMatrix) -> Self {
        let mut t = TripletBuilder::with_capacity(a.nrows * b.nrows, a.ncols * b.ncols, a.nnz() * b.nnz());
        for (i, k, va) in a.triplets() {
            for (j, l, vb) in b.triplets() {
                t.push(i * b.nrows + j, k * b.ncols + l, va * vb);
            }
        }
        t.build()
    }

    pub fn block_diag(blocks: &[&SparseMatrix]) -> Self {
        let nr: usize = blocks.iter().map(|b| b.nrows).sum();
        let nc: usize = blocks.iter().map(|b| b.ncols).sum();
        let mut indptr = Vec::with_capacity(nr + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        let mut c0 = 0;
        for b in blocks {
            for i in 0..b.nrows {
                for (j, v) in b.row(i) {
                    indices.push(c0 + j);
                    values.push(v);
                }
                indptr.push(indices.len());
            }
            c0 += b.ncols;
        }
        Self { nrows: nr, ncols: nc, indptr, indices, values }
    }

    /// Horizontal concatenation `[a b ...]`.
    pub fn hstack(blocks: &[&SparseMatrix]) -> Self {
        let nr = blocks.first().map_or(0, |b| b.nrows);
        let nc: usize = blocks.iter().map(|b| b.ncols).sum();
        let mut t = TripletBuilder::new(nr, nc);
        let mut c0 = 0;
        for b in blocks {
            assert_eq!(b.nrows, nr, "hstack: row counts differ");
            for (i, j, v) in b.triplets() {
                t.push(i, c0 + j, v);
            }
            c0 += b.ncols;
        }
        t.build()
    }

    /// Vertical concatenation.
    pub fn vstack(blocks: &[&SparseMatrix]) -> Self {
        let nc = blocks.first().map_or(0, |b| b.ncols);
        let nr: usize = blocks.iter().map(|b| b.nrows).sum();
        let mut t = TripletBuilder::new(nr, nc);
        let mut r0 = 0;
        for b in blocks {
            assert_eq!(b.ncols, nc, "vstack: column counts differ");
            for (i, j, v) in b.triplets() {
                t.push(r0 + i, j, v);
            }
            r0 += b.nrows;
        }
        t.build()
    }

    /// Sub-matrix of the given row and column ranges.
    pub fn slice(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Self {
        let mut t = TripletBuilder::new(rows.len(), cols.len());
        for i in rows.clone() {
            for (j, v) in self.row(i) {
                if cols.contains(&j) {
                    t.push(i - rows.start, j - cols.start, v);
                }
            }
        }
        t.build()
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v;
        }
        m
    }

    /// Dense product `self * b`.
    pub fn mul_dense(&self, b: &Mat<f64>) -> Mat<f64> {
        assert_eq!(self.ncols, b.nrows(), "mul_dense: inner dimensions differ");
        let mut out = Mat::zeros(self.nrows, b.ncols());
        for c in 0..b.ncols() {
            let x = b.col_as_slice(c);
            let y = out.col_as_slice_mut(c);
            self.mul_vec_into(x, y);
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        self.sub(&self.transpose()).max_abs()
    }

    /// Writes `row col value` lines (zero-based indices).
    pub fn write_coo<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "% {} {} {}", self.nrows, self.ncols, self.nnz())?;
        for (i, j, v) in self.triplets() {
            writeln!(w, "{i} {j} {v:.17e}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SparseMatrix {
        SparseMatrix::from_triplets(2, 3, vec![(0, 2, 1.0), (0, 0, 2.0), (1, 1, 3.0), (0, 2, 4.0)])
    }

    #[test]
    fn duplicates_are_summed_and_sorted() {
        let a = small();
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(0, 2), 5.0);
        assert_eq!(a.indices(), &[0, 2, 1]);
        assert_eq!(a.indptr(), &[0, 2, 3]);
    }

    #[test]
    fn cancelling_entries_are_dropped() {
        let a = SparseMatrix::from_triplets(1, 1, vec![(0, 0, 1.0), (0, 0, -1.0)]);
        assert_eq!(a.nnz(), 0);
    }

    #[test]
    fn transpose_and_products_agree_with_dense() {
        let a = small();
        let b = SparseMatrix::from_triplets(3, 2, vec![(0, 0, 1.0), (2, 1, -1.0), (1, 0, 0.5)]);
        let ab = a.matmul(&b).to_dense();
        let dense = &a.to_dense() * &b.to_dense();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(ab[(i, j)], dense[(i, j)]);
            }
        }
        assert_eq!(a.transpose().transpose(), a);
        let x = [1.0, 2.0];
        assert_eq!(a.tr_mul_vec(&x), a.transpose().mul_vec(&x));
    }

    #[test]
    fn kron_indexing() {
        let a = SparseMatrix::from_triplets(2, 2, vec![(0, 1, 2.0), (1, 0, 1.0)]);
        let b = SparseMatrix::identity(3);
        let k = SparseMatrix::kron(&a, &b);
        // row block 0, column block 1, offset 2 in each
        assert_eq!(k.get(2, 5), 2.0);
        assert_eq!(k.get(3, 0), 1.0);
        assert_eq!(k.nnz(), 6);
    }

    #[test]
    fn lin_comb_merges_patterns() {
        let a = small();
        let d = SparseMatrix::lin_comb(2.0, &a, -2.0, &a);
        assert_eq!(d.nnz(), 0);
        let s = a.add(&SparseMatrix::from_triplets(2, 3, vec![(1, 2, 1.0)]));
        assert_eq!(s.nnz(), 4);
        assert_eq!(s.get(1, 2), 1.0);
    }

    #[test]
    fn block_diag_and_stack_shapes() {
        let a = small();
        let bd = SparseMatrix::block_diag(&[&a, &a]);
        assert_eq!(bd.shape(), (4, 6));
        assert_eq!(bd.get(2, 5), 5.0);
        assert_eq!(SparseMatrix::hstack(&[&a, &a]).shape(), (2, 6));
        assert_eq!(SparseMatrix::vstack(&[&a, &a]).shape(), (4, 3));
        assert_eq!(bd.slice(2..4, 3..6), a);
    }

    #[test]
    fn coo_dump_lists_every_entry() {
        let mut buf = Vec::new();
        small().write_coo(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
    }
}
