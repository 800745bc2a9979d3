use std::cmp::Ordering;

use crate::dense::DenseMatrix;
use crate::scalar::Real;

/// Coordinate-form builder. Duplicates are summed on compression.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseMatrix<T> {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Real> SparseMatrix<T> {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::with_capacity(cap),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn push(&mut self, i: usize, j: usize, v: T) {
        assert!(i < self.nrows && j < self.ncols, "entry ({i}, {j}) out of bounds");
        self.entries.push((i, j, v));
    }

    pub fn extend(&mut self, other: impl IntoIterator<Item = (usize, usize, T)>) {
        for (i, j, v) in other {
            self.push(i, j, v);
        }
    }

    pub fn entries(&self) -> &[(usize, usize, T)] {
        &self.entries
    }

    /// Sorts by (row, column, value) before summing, so the result does not
    /// depend on insertion order. Exact zeros are kept.
    pub fn to_csr(&self) -> CsrMatrix<T> {
        let mut e = self.entries.clone();
        e.sort_unstable_by(|a, b| {
            (a.0, a.1)
                .cmp(&(b.0, b.1))
                .then_with(|| a.2.partial_cmp(&b.2).unwrap_or(Ordering::Equal))
        });
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::with_capacity(e.len());
        let mut data: Vec<T> = Vec::with_capacity(e.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in e {
            if last == Some((i, j)) {
                *data.last_mut().expect("nonempty") += v;
            } else {
                indices.push(j);
                data.push(v);
                indptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.nrows {
            indptr[i + 1] += indptr[i];
        }
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            indptr,
            indices,
            data,
        }
    }
}

/// Compressed sparse rows; column indices strictly increase within a row.
/// The transpose of a CSR matrix read as CSR is its CSC form.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: vec![T::one(); n],
        }
    }

    pub fn from_dense(a: &DenseMatrix<T>) -> Self {
        let mut s = SparseMatrix::new(a.rows(), a.cols());
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                if a[(i, j)] != T::zero() {
                    s.push(i, j, a[(i, j)]);
                }
            }
        }
        s.to_csr()
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let r = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[r.clone()], &self.data[r])
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => T::zero(),
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum()
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut count = vec![0usize; self.ncols + 1];
        for &j in &self.indices {
            count[j + 1] += 1;
        }
        for j in 0..self.ncols {
            count[j + 1] += count[j];
        }
        let indptr = count.clone();
        let mut next = count;
        let mut indices = vec![0; self.nnz()];
        let mut data = vec![T::zero(); self.nnz()];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let p = next[j];
                indices[p] = i;
                data[p] = v;
                next[j] += 1;
            }
        }
        Self {
            nrows: self.ncols,
            ncols: self.nrows,
            indptr,
            indices,
            data,
        }
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    /// max |A − Aᵀ| over all entries (absolute).
    pub fn symmetry_defect(&self) -> T {
        if self.nrows != self.ncols {
            return T::infinity();
        }
        let t = self.transpose();
        let mut m = T::zero();
        for i in 0..self.nrows {
            let (ca, va) = self.row(i);
            let (cb, vb) = t.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ca.len() || q < cb.len() {
                let ja = ca.get(p).copied().unwrap_or(usize::MAX);
                let jb = cb.get(q).copied().unwrap_or(usize::MAX);
                let d = match ja.cmp(&jb) {
                    Ordering::Less => {
                        p += 1;
                        va[p - 1]
                    }
                    Ordering::Greater => {
                        q += 1;
                        vb[q - 1]
                    }
                    Ordering::Equal => {
                        p += 1;
                        q += 1;
                        va[p - 1] - vb[q - 1]
                    }
                };
                m = m.max(d.abs());
            }
        }
        m
    }

    /// Symmetric permutation `B[i][j] = A[perm[i]][perm[j]]`.
    pub fn permute_symmetric(&self, perm: &[usize]) -> Self {
        assert_eq!(self.nrows, self.ncols);
        assert_eq!(perm.len(), self.nrows);
        let mut inv = vec![0usize; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut s = SparseMatrix::with_capacity(self.nrows, self.ncols, self.nnz());
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                s.push(inv[i], inv[j], v);
            }
        }
        s.to_csr()
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut d = DenseMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d[(i, j)] = v;
            }
        }
        d
    }

    /// Adjacency lists of the symmetrized pattern without the diagonal.
    pub fn symmetric_adjacency(&self) -> Vec<Vec<usize>> {
        let n = self.nrows;
        let mut adj = vec![Vec::new(); n];
        for i in 0..n {
            let (cols, _) = self.row(i);
            for &j in cols {
                if i != j {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }
}

pub(crate) fn norm2<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_summed_and_sorted() {
        let mut s = SparseMatrix::<f64>::new(2, 3);
        s.push(1, 2, 1.0);
        s.push(0, 1, 2.0);
        s.push(1, 2, 0.5);
        s.push(1, 0, -1.0);
        let c = s.to_csr();
        assert_eq!(c.indptr(), &[0, 1, 3]);
        assert_eq!(c.indices(), &[1, 0, 2]);
        assert_eq!(c.data(), &[2.0, -1.0, 1.5]);
        assert_eq!(c.get(1, 2), 1.5);
        assert_eq!(c.get(0, 0), 0.0);
        let t = c.transpose();
        assert_eq!(t.get(2, 1), 1.5);
        assert_eq!(t.nrows(), 3);
    }

    #[test]
    fn symmetry_defect_and_permutation() {
        let mut s = SparseMatrix::<f64>::new(3, 3);
        s.push(0, 1, 1.0);
        s.push(1, 0, 1.25);
        s.push(2, 2, 3.0);
        let c = s.to_csr();
        assert_eq!(c.symmetry_defect(), 0.25);
        let p = c.permute_symmetric(&[2, 0, 1]);
        assert_eq!(p.get(0, 0), 3.0);
        assert_eq!(p.get(1, 2), 1.0);
        assert_eq!(p.get(2, 1), 1.25);
    }
}
