//! Static condensation of the element-interior unknowns.
//!
//! Per element, the interior set is the velocity together with the
//! pressure deviation (coefficients 1.. of the orthonormal pressure basis);
//! the retained set is the interior-edge facet unknowns and the element mean
//! pressure (coefficient 0). Boundary facets carry data and go to the right
//! side. The multiplier couples only to the mean pressures.
//!
//! The mean-pressure rows have a zero diagonal after condensation since
//! b_h(v, 0; 1) = 0 for every v, so the reduced system stays indefinite.

use rayon::prelude::*;

use crate::dense::{DenseLu, DenseMatrix};
use crate::error::{Error, Result};
use crate::hdg::{GlobalSystem, HdgSolution, Slot};
use crate::scalar::Real;
use crate::solver::{CsrMatrix, LuOptions, SparseLu, SparseMatrix};

/// Cached element data for recovering interior unknowns.
#[derive(Debug, Clone)]
pub struct ElementFactor<T> {
    /// Local indices of the interior unknowns.
    pub interior: Vec<usize>,
    /// Local indices of the retained unknowns and their global positions.
    pub retained: Vec<(usize, usize)>,
    pub lu: DenseLu<T>,
    /// L_IR.
    pub coupling: DenseMatrix<T>,
    /// Interior right side with boundary data already moved over.
    pub load: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct CondensedSystem<'s, 'm, T> {
    pub system: &'s GlobalSystem<'m, T>,
    pub matrix: CsrMatrix<T>,
    pub rhs: Vec<T>,
    pub factors: Vec<ElementFactor<T>>,
}

impl<'s, 'm, T: Real> CondensedSystem<'s, 'm, T> {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn num_facet_unknowns(&self) -> usize {
        self.system.dof_map.facet_range().len()
    }

    pub fn mean_pressure_index(&self, element: usize) -> usize {
        self.num_facet_unknowns() + element
    }

    pub fn multiplier_index(&self) -> usize {
        self.num_facet_unknowns() + self.system.dof_map.num_elements()
    }
}

/// Retained dimension 2(k+1)·#interior edges + #elements + 1.
pub fn condensed_dimension(n_interior_edges: usize, n_elements: usize, k: usize) -> usize {
    2 * (k + 1) * n_interior_edges + n_elements + 1
}

type ElementSchur<T> = (ElementFactor<T>, DenseMatrix<T>, Vec<T>);

pub fn condense<'s, 'm, T: Real>(sys: &'s GlobalSystem<'m, T>) -> Result<CondensedSystem<'s, 'm, T>> {
    let d = &sys.dof_map;
    let mesh = sys.mesh;
    let n_facet = d.facet_range().len();
    let facet_start = d.facet_range().start;
    let ne = d.num_elements();

    let parts: Vec<ElementSchur<T>> = (0..ne)
        .into_par_iter()
        .map(|k| {
            let lf = &sys.locals[k];
            let slots = d.element_slots(mesh, k);
            let pr = lf.p_range();
            let mut interior: Vec<usize> = lf.u_range().collect();
            interior.extend(pr.start + 1..pr.end);
            let mut retained = Vec::new();
            let mut fixed = Vec::new();
            for a in lf.uhat_range() {
                match slots[a] {
                    Slot::Free(g) => retained.push((a, g - facet_start)),
                    Slot::Fixed { edge, index } => fixed.push((a, sys.boundary[edge][index])),
                }
            }
            retained.push((pr.start, n_facet + k));

            let mut f: Vec<T> = sys.loads[k].clone();
            for (row, fr) in f.iter_mut().enumerate() {
                for &(b, gv) in &fixed {
                    *fr -= lf.matrix[(row, b)] * gv;
                }
            }
            let sub = |rows: &[usize], cols: &[usize]| {
                DenseMatrix::from_fn(rows.len(), cols.len(), |i, j| lf.matrix[(rows[i], cols[j])])
            };
            let ridx: Vec<usize> = retained.iter().map(|r| r.0).collect();
            let lu = DenseLu::new(sub(&interior, &interior)).map_err(|_| Error::SingularLocalBlock { element: k })?;
            let l_ir = sub(&interior, &ridx);
            let l_ri = sub(&ridx, &interior);
            let f_i: Vec<T> = interior.iter().map(|&i| f[i]).collect();
            let x_r = lu.solve_matrix(&l_ir);
            let x_f = lu.solve(&f_i);
            let mut schur = sub(&ridx, &ridx);
            let prod = l_ri.matmul(&x_r);
            for i in 0..ridx.len() {
                for j in 0..ridx.len() {
                    schur[(i, j)] -= prod[(i, j)];
                }
            }
            let lr_xf = l_ri.matvec(&x_f);
            let g: Vec<T> = ridx.iter().zip(lr_xf).map(|(&r, v)| f[r] - v).collect();
            Ok((
                ElementFactor {
                    interior,
                    retained,
                    lu,
                    coupling: l_ir,
                    load: f_i,
                },
                schur,
                g,
            ))
        })
        .collect::<Result<_>>()?;

    let n = n_facet + ne + 1;
    let mut coo = SparseMatrix::new(n, n);
    let mut rhs = vec![T::zero(); n];
    let mut factors = Vec::with_capacity(ne);
    for (k, (fac, schur, g)) in parts.into_iter().enumerate() {
        for (i, &(_, gi)) in fac.retained.iter().enumerate() {
            rhs[gi] += g[i];
            for (j, &(_, gj)) in fac.retained.iter().enumerate() {
                let v = schur[(i, j)];
                if v != T::zero() {
                    coo.push(gi, gj, v);
                }
            }
        }
        let c = crate::hdg::mean_pressure_weight(mesh, k);
        coo.push(n - 1, n_facet + k, c);
        coo.push(n_facet + k, n - 1, c);
        factors.push(fac);
    }
    Ok(CondensedSystem {
        system: sys,
        matrix: coo.to_csr(),
        rhs,
        factors,
    })
}

pub fn solve_condensed<'m, T: Real>(cs: &CondensedSystem<'_, 'm, T>) -> Result<HdgSolution<'m, T>> {
    solve_condensed_with(cs, &LuOptions::default())
}

pub fn solve_condensed_with<'m, T: Real>(cs: &CondensedSystem<'_, 'm, T>, opts: &LuOptions) -> Result<HdgSolution<'m, T>> {
    let lu = SparseLu::factorize(&cs.matrix, opts)?;
    let (y, report) = lu.solve(&cs.rhs)?;
    let mut sol = recover(cs, &y);
    sol.report = Some(report);
    Ok(sol)
}

/// Rebuilds the full solution from retained values `y`.
pub fn recover<'m, T: Real>(cs: &CondensedSystem<'_, 'm, T>, y: &[T]) -> HdgSolution<'m, T> {
    let sys = cs.system;
    let mut sol = HdgSolution::zeros(sys.mesh, &sys.spec);
    let interiors: Vec<Vec<T>> = cs
        .factors
        .par_iter()
        .map(|fac| {
            let xr: Vec<T> = fac.retained.iter().map(|&(_, g)| y[g]).collect();
            let c = fac.coupling.matvec(&xr);
            let rhs: Vec<T> = fac.load.iter().zip(c).map(|(&f, v)| f - v).collect();
            fac.lu.solve(&rhs)
        })
        .collect();
    let nu2 = 2 * sys.spec.nu();
    for (k, xi) in interiors.into_iter().enumerate() {
        sol.u[k].copy_from_slice(&xi[..nu2]);
        sol.p[k][0] = y[cs.mean_pressure_index(k)];
        sol.p[k][1..].copy_from_slice(&xi[nu2..]);
    }
    let d = &sys.dof_map;
    let nf = sys.spec.nf();
    let fs = d.facet_range().start;
    for e in 0..sol.uhat.len() {
        for c in 0..2 {
            for m in 0..nf {
                sol.uhat[e][c * nf + m] = match d.facet(e, c, m) {
                    Slot::Free(g) => y[g - fs],
                    Slot::Fixed { edge, index } => sys.boundary[edge][index],
                };
            }
        }
    }
    sol.multiplier = y[cs.multiplier_index()];
    sol
}
