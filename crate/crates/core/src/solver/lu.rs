//! Left-looking sparse LU (Gilbert–Peierls) with threshold partial pivoting.
//!
//! The matrix is first permuted symmetrically by the fill-reducing ordering.
//! Column k is then obtained by a sparse triangular solve with the columns
//! of L computed so far; the pivot is the diagonal entry whenever it is
//! within the threshold of the largest candidate, otherwise the largest.
//! L has a unit diagonal stored first in each column; U stores its diagonal
//! last.

use std::time::{Duration, Instant};

use super::matrix::{norm2, CsrMatrix};
use super::ordering::nested_dissection;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OrderingKind {
    Natural,
    #[default]
    NestedDissection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PivotPolicy {
    /// Keep the diagonal if |a_kk| ≥ tol · max_i |a_ik| among candidates.
    Threshold(f64),
    /// Never pivot; used to read off the inertia of SPD candidates.
    DiagonalOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LuOptions {
    pub ordering: OrderingKind,
    pub pivot: PivotPolicy,
    pub max_refinement_steps: usize,
}

impl Default for LuOptions {
    fn default() -> Self {
        Self {
            ordering: OrderingKind::NestedDissection,
            pivot: PivotPolicy::Threshold(0.1),
            max_refinement_steps: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    /// ‖b − Ax‖₂ / ‖b‖₂ with A the unfactored matrix; ‖b − Ax‖₂ if b = 0.
    pub relative_residual: f64,
    /// Pivots taken off the diagonal of the reordered matrix.
    pub off_diagonal_pivots: usize,
    pub refinement_steps: usize,
    pub factor_nnz: usize,
    pub factor_time: Duration,
    pub solve_time: Duration,
}

#[derive(Debug, Clone)]
pub struct SparseLu<T> {
    n: usize,
    /// Symmetric ordering, `perm[new] = old`.
    perm: Vec<usize>,
    /// Row `i` of the reordered matrix is pivot row `pinv[i]`.
    pinv: Vec<usize>,
    l_ptr: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<T>,
    u_ptr: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<T>,
    matrix: CsrMatrix<T>,
    off_diagonal_pivots: usize,
    max_refinement_steps: usize,
    factor_time: Duration,
}

const UNSET: usize = usize::MAX;

impl<T: Real> SparseLu<T> {
    pub fn factorize(a: &CsrMatrix<T>, opts: &LuOptions) -> Result<Self> {
        let start = Instant::now();
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                found: a.ncols(),
            });
        }
        let n = a.nrows();
        let perm: Vec<usize> = match opts.ordering {
            OrderingKind::Natural => (0..n).collect(),
            OrderingKind::NestedDissection => nested_dissection(&a.symmetric_adjacency()),
        };
        let c = a.permute_symmetric(&perm);
        // Columns of the reordered matrix.
        let ccols = c.transpose();

        let mut pinv = vec![UNSET; n];
        let mut l_ptr = Vec::with_capacity(n + 1);
        let mut u_ptr = Vec::with_capacity(n + 1);
        let cap = 4 * c.nnz() + n;
        let mut l_idx = Vec::with_capacity(cap);
        let mut l_val = Vec::with_capacity(cap);
        let mut u_idx = Vec::with_capacity(cap);
        let mut u_val = Vec::with_capacity(cap);

        let mut x = vec![T::zero(); n];
        let mut out = vec![0usize; n];
        let mut stack = vec![0usize; n];
        let mut pstack = vec![0usize; n];
        let mut mark = vec![UNSET; n];
        let mut off_diagonal_pivots = 0;

        for k in 0..n {
            l_ptr.push(l_idx.len());
            u_ptr.push(u_idx.len());
            let (brows, bvals) = ccols.row(k);

            // Nonzero pattern of L \ C(:, k) in topological order: out[top..n].
            let mut top = n;
            for &i in brows {
                if mark[i] == k {
                    continue;
                }
                let mut head = 0usize;
                stack[0] = i;
                loop {
                    let j = stack[head];
                    let jn = pinv[j];
                    if mark[j] != k {
                        mark[j] = k;
                        pstack[head] = if jn == UNSET { 0 } else { l_ptr[jn] + 1 };
                    }
                    let end = if jn == UNSET { 0 } else { l_end(&l_ptr, l_idx.len(), jn) };
                    let mut descended = false;
                    let mut p = pstack[head];
                    while p < end {
                        let r = l_idx[p];
                        p += 1;
                        if mark[r] != k {
                            pstack[head] = p;
                            head += 1;
                            stack[head] = r;
                            descended = true;
                            break;
                        }
                    }
                    if !descended {
                        top -= 1;
                        out[top] = j;
                        if head == 0 {
                            break;
                        }
                        head -= 1;
                    }
                }
            }

            // Numeric sparse triangular solve.
            for &i in &out[top..n] {
                x[i] = T::zero();
            }
            let mut colmax = T::zero();
            for (&i, &v) in brows.iter().zip(bvals) {
                x[i] = v;
                colmax = colmax.max(v.abs());
            }
            for px in top..n {
                let j = out[px];
                let jn = pinv[j];
                if jn == UNSET {
                    continue;
                }
                let xj = x[j];
                if xj == T::zero() {
                    continue;
                }
                for p in l_ptr[jn] + 1..l_end(&l_ptr, l_idx.len(), jn) {
                    x[l_idx[p]] -= l_val[p] * xj;
                }
            }

            // Pivot choice.
            let mut ipiv = UNSET;
            let mut amax = T::zero();
            for &i in &out[top..n] {
                if pinv[i] == UNSET {
                    let t = x[i].abs();
                    if ipiv == UNSET || t > amax {
                        amax = t;
                        ipiv = i;
                    }
                } else {
                    u_idx.push(pinv[i]);
                    u_val.push(x[i]);
                }
            }
            match opts.pivot {
                PivotPolicy::DiagonalOnly => ipiv = if pinv[k] == UNSET { k } else { UNSET },
                PivotPolicy::Threshold(tol) => {
                    if pinv[k] == UNSET && mark[k] == k && x[k].abs() >= amax * T::lit(tol) {
                        ipiv = k;
                    }
                }
            }
            let tiny = T::epsilon() * colmax * T::lit(16.0);
            let pivot = if ipiv == UNSET || mark[ipiv] != k { T::zero() } else { x[ipiv] };
            if !(pivot.abs() > tiny) || !pivot.is_finite() {
                return Err(Error::SingularMatrix {
                    step: k,
                    column: perm[k],
                });
            }
            if ipiv != k {
                off_diagonal_pivots += 1;
            }
            u_idx.push(k);
            u_val.push(pivot);
            pinv[ipiv] = k;
            l_idx.push(ipiv);
            l_val.push(T::one());
            for &i in &out[top..n] {
                if pinv[i] == UNSET {
                    l_idx.push(i);
                    l_val.push(x[i] / pivot);
                }
                x[i] = T::zero();
            }
        }
        l_ptr.push(l_idx.len());
        u_ptr.push(u_idx.len());
        for r in &mut l_idx {
            *r = pinv[*r];
        }

        Ok(Self {
            n,
            perm,
            pinv,
            l_ptr,
            l_idx,
            l_val,
            u_ptr,
            u_idx,
            u_val,
            matrix: a.clone(),
            off_diagonal_pivots,
            max_refinement_steps: opts.max_refinement_steps,
            factor_time: start.elapsed(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn factor_nnz(&self) -> usize {
        self.l_val.len() + self.u_val.len()
    }

    pub fn off_diagonal_pivots(&self) -> usize {
        self.off_diagonal_pivots
    }

    /// Diagonal of U in elimination order.
    pub fn pivots(&self) -> Vec<T> {
        (0..self.n).map(|j| self.u_val[self.u_ptr[j + 1] - 1]).collect()
    }

    pub fn matrix(&self) -> &CsrMatrix<T> {
        &self.matrix
    }

    fn apply_inverse(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut y = vec![T::zero(); n];
        for (i, &old) in self.perm.iter().enumerate() {
            y[self.pinv[i]] = b[old];
        }
        for j in 0..n {
            let yj = y[j];
            if yj == T::zero() {
                continue;
            }
            for p in self.l_ptr[j] + 1..self.l_ptr[j + 1] {
                y[self.l_idx[p]] -= self.l_val[p] * yj;
            }
        }
        for j in (0..n).rev() {
            let d = self.u_ptr[j + 1] - 1;
            y[j] /= self.u_val[d];
            let yj = y[j];
            if yj == T::zero() {
                continue;
            }
            for p in self.u_ptr[j]..d {
                y[self.u_idx[p]] -= self.u_val[p] * yj;
            }
        }
        let mut x = vec![T::zero(); n];
        for (j, &old) in self.perm.iter().enumerate() {
            x[old] = y[j];
        }
        x
    }

    fn residual(&self, b: &[T], x: &[T]) -> Vec<T> {
        let ax = self.matrix.matvec(x);
        b.iter().zip(ax).map(|(&bi, ai)| bi - ai).collect()
    }

    /// Solves with iterative refinement against the unfactored matrix.
    pub fn solve(&self, b: &[T]) -> Result<(Vec<T>, SolveReport)> {
        let start = Instant::now();
        if b.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: b.len(),
            });
        }
        let mut x = self.apply_inverse(b);
        let mut r = self.residual(b, &x);
        let mut rn = norm2(&r);
        let mut steps = 0;
        while steps < self.max_refinement_steps && rn > T::zero() {
            let dx = self.apply_inverse(&r);
            let cand: Vec<T> = x.iter().zip(&dx).map(|(&a, &d)| a + d).collect();
            let rc = self.residual(b, &cand);
            let rcn = norm2(&rc);
            if !(rcn < rn) {
                break;
            }
            x = cand;
            r = rc;
            rn = rcn;
            steps += 1;
        }
        let bn = norm2(b);
        let rel = if bn > T::zero() { rn / bn } else { rn };
        Ok((
            x,
            SolveReport {
                relative_residual: rel.to_f64_lossy(),
                off_diagonal_pivots: self.off_diagonal_pivots,
                refinement_steps: steps,
                factor_nnz: self.factor_nnz(),
                factor_time: self.factor_time,
                solve_time: start.elapsed(),
            },
        ))
    }
}

/// End of column `j` of L while column `j + 1` may still be in progress.
fn l_end(l_ptr: &[usize], len: usize, j: usize) -> usize {
    if j + 1 < l_ptr.len() {
        l_ptr[j + 1]
    } else {
        len
    }
}

/// Factorizes and solves once.
pub fn solve_sparse<T: Real>(a: &CsrMatrix<T>, b: &[T], opts: &LuOptions) -> Result<(Vec<T>, SolveReport)> {
    SparseLu::factorize(a, opts)?.solve(b)
}

/// True when the symmetric matrix admits an LDLᵀ factorization without
/// pivoting whose pivots are all positive.
pub fn is_positive_definite<T: Real>(a: &CsrMatrix<T>) -> bool {
    let opts = LuOptions {
        pivot: PivotPolicy::DiagonalOnly,
        ..LuOptions::default()
    };
    match SparseLu::factorize(a, &opts) {
        Ok(f) => f.pivots().iter().all(|&d| d > T::zero()),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::matrix::SparseMatrix;

    #[test]
    fn identity_returns_rhs() {
        let a = CsrMatrix::<f64>::identity(5);
        let b = vec![1.0, -2.0, 3.0, 0.0, 5.5];
        let (x, rep) = solve_sparse(&a, &b, &LuOptions::default()).unwrap();
        assert_eq!(x, b);
        assert_eq!(rep.relative_residual, 0.0);
    }

    #[test]
    fn antidiagonal_requires_pivoting() {
        let mut s = SparseMatrix::<f64>::new(2, 2);
        s.push(0, 1, 1.0);
        s.push(1, 0, 1.0);
        for ordering in [OrderingKind::Natural, OrderingKind::NestedDissection] {
            let opts = LuOptions {
                ordering,
                ..LuOptions::default()
            };
            let (x, rep) = solve_sparse(&s.to_csr(), &[1.0, 2.0], &opts).unwrap();
            assert_eq!(x, vec![2.0, 1.0]);
            assert_eq!(rep.off_diagonal_pivots, 2);
        }
    }

    #[test]
    fn singular_reports_step() {
        let mut s = SparseMatrix::<f64>::new(3, 3);
        s.push(0, 0, 1.0);
        s.push(1, 1, 1.0);
        s.push(0, 2, 1.0);
        let opts = LuOptions {
            ordering: OrderingKind::Natural,
            ..LuOptions::default()
        };
        match SparseLu::factorize(&s.to_csr(), &opts) {
            Err(Error::SingularMatrix { step, column }) => {
                assert_eq!(step, 2);
                assert_eq!(column, 2);
            }
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn positive_definiteness() {
        let mut s = SparseMatrix::<f64>::new(2, 2);
        s.push(0, 0, 2.0);
        s.push(0, 1, 1.0);
        s.push(1, 0, 1.0);
        s.push(1, 1, 2.0);
        assert!(is_positive_definite(&s.to_csr()));
        s.push(1, 1, -3.0);
        assert!(!is_positive_definite(&s.to_csr()));
    }
}
