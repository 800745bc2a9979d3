use std::ops::Range;

use super::geometry::{EdgeSide, ElementGeometry};
use super::tables::{EdgeTables, ReferenceTables};
use super::{SpaceSpec, Stabilization};
use crate::basis::edge_trace_projection;
use crate::dense::DenseMatrix;
use crate::error::Result;
use crate::mesh::{Mesh, Point2};
use crate::scalar::Real;

/// Element matrix in local order [u₁, u₂ | û on edges 0, 1, 2 | p]:
///
/// ```text
/// [ A_uu  A_uû  B_uᵀ ]
/// [ A_ûu  A_ûû  B_ûᵀ ]
/// [ B_u   B_û   0    ]
/// ```
///
/// Facet unknowns use the global edge orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalForms<T> {
    pub matrix: DenseMatrix<T>,
    nu: usize,
    nf: usize,
    np: usize,
}

impl<T: Real> LocalForms<T> {
    pub fn u_range(&self) -> Range<usize> {
        0..2 * self.nu
    }

    pub fn uhat_range(&self) -> Range<usize> {
        2 * self.nu..2 * self.nu + 6 * self.nf
    }

    /// Local indices of the facet unknowns on local edge `s`.
    pub fn edge_range(&self, s: usize) -> Range<usize> {
        let start = 2 * self.nu + s * 2 * self.nf;
        start..start + 2 * self.nf
    }

    pub fn p_range(&self) -> Range<usize> {
        let s = 2 * self.nu + 6 * self.nf;
        s..s + self.np
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn block(&self, rows: Range<usize>, cols: Range<usize>) -> DenseMatrix<T> {
        DenseMatrix::from_fn(rows.len(), cols.len(), |i, j| self.matrix[(rows.start + i, cols.start + j)])
    }

    pub fn a_uu(&self) -> DenseMatrix<T> {
        self.block(self.u_range(), self.u_range())
    }

    pub fn a_u_uhat(&self) -> DenseMatrix<T> {
        self.block(self.u_range(), self.uhat_range())
    }

    pub fn a_uhat_uhat(&self) -> DenseMatrix<T> {
        self.block(self.uhat_range(), self.uhat_range())
    }

    pub fn b_u(&self) -> DenseMatrix<T> {
        self.block(self.p_range(), self.u_range())
    }

    pub fn b_uhat(&self) -> DenseMatrix<T> {
        self.block(self.p_range(), self.uhat_range())
    }
}

/// Element contributions of a_h and b_h.
pub fn local_forms<T: Real>(
    mesh: &Mesh<T>,
    element: usize,
    spec: &SpaceSpec<T>,
    tables: &ReferenceTables<T>,
) -> Result<LocalForms<T>> {
    let geom = ElementGeometry::new(mesh, element)?;
    let (nu, nf, np) = (spec.nu(), spec.nf(), spec.np());
    let n = spec.local_dim();
    let mut a = DenseMatrix::<T>::zeros(n, n);
    let uix = |c: usize, i: usize| c * nu + i;
    let hix = |s: usize, c: usize, m: usize| 2 * nu + s * 2 * nf + c * nf + m;
    let pix = |l: usize| 2 * nu + 6 * nf + l;

    // Volume terms: (∇u, ∇v) and −(div v, q).
    for q in 0..tables.tri.len() {
        let w = tables.tri.weights[q] * geom.det;
        let grads: Vec<[T; 2]> = tables.tri_velocity[q].iter().map(|j| geom.grad(j.grad)).collect();
        let psi = &tables.tri_pressure[q];
        for i in 0..nu {
            for j in 0..nu {
                let g = w * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                for c in 0..2 {
                    a[(uix(c, i), uix(c, j))] += g;
                }
            }
            for c in 0..2 {
                for (l, &pl) in psi.iter().enumerate() {
                    let v = -w * grads[i][c] * pl;
                    a[(pix(l), uix(c, i))] += v;
                    a[(uix(c, i), pix(l))] += v;
                }
            }
        }
    }

    let half_tau = spec.tau * T::lit(0.5);
    for (s, side) in EdgeSide::all(mesh, element).into_iter().enumerate() {
        let tab = tables.edge.side(s, side.forward);
        let rule = &tables.edge.rule;
        let ds = side.length * T::lit(0.5);
        let nrm = [side.normal.x, side.normal.y];
        for (q, (&wq, leg)) in rule.weights.iter().zip(&tables.edge.legendre).enumerate() {
            let w = wq * ds;
            let jets = &tab.velocity[q];
            let dn: Vec<T> = jets
                .iter()
                .map(|j| {
                    let g = geom.grad(j.grad);
                    g[0] * nrm[0] + g[1] * nrm[1]
                })
                .collect();
            // ⟨∂ₙu, v̂ − v⟩ + ⟨∂ₙv, û − u⟩
            for i in 0..nu {
                for j in 0..nu {
                    let v = -w * (dn[i] * jets[j].value + dn[j] * jets[i].value);
                    for c in 0..2 {
                        a[(uix(c, i), uix(c, j))] += v;
                    }
                }
                for (m, &lm) in leg.iter().enumerate() {
                    let v = w * dn[i] * lm;
                    for c in 0..2 {
                        a[(uix(c, i), hix(s, c, m))] += v;
                        a[(hix(s, c, m), uix(c, i))] += v;
                    }
                }
            }
            // −⟨(v̂ − v)·n, q⟩
            for (l, &pl) in tab.pressure[q].iter().enumerate() {
                for c in 0..2 {
                    for i in 0..nu {
                        let v = w * jets[i].value * nrm[c] * pl;
                        a[(pix(l), uix(c, i))] += v;
                        a[(uix(c, i), pix(l))] += v;
                    }
                    for (m, &lm) in leg.iter().enumerate() {
                        let v = -w * lm * nrm[c] * pl;
                        a[(pix(l), hix(s, c, m))] += v;
                        a[(hix(s, c, m), pix(l))] += v;
                    }
                }
            }
        }

        // Stabilization. With ds = h_e/2 dt the factor τ/h_e becomes τ/2.
        match spec.stabilization {
            Stabilization::Projected => {
                let pe = trace_projection_matrix(&tables.edge, s, side.forward, spec.k, nu)?;
                for m in 0..nf {
                    for i in 0..nu {
                        for j in 0..nu {
                            let v = half_tau * pe[m][i] * pe[m][j];
                            for c in 0..2 {
                                a[(uix(c, i), uix(c, j))] += v;
                            }
                        }
                        let v = -half_tau * pe[m][i];
                        for c in 0..2 {
                            a[(uix(c, i), hix(s, c, m))] += v;
                            a[(hix(s, c, m), uix(c, i))] += v;
                        }
                    }
                    for c in 0..2 {
                        a[(hix(s, c, m), hix(s, c, m))] += half_tau;
                    }
                }
            }
            Stabilization::ReducedQuadrature | Stabilization::Unprojected => {
                let et = if spec.stabilization == Stabilization::ReducedQuadrature {
                    &tables.reduced_edge
                } else {
                    &tables.edge
                };
                let tab = et.side(s, side.forward);
                for (q, (&wq, leg)) in et.rule.weights.iter().zip(&et.legendre).enumerate() {
                    let w = half_tau * wq;
                    let jets = &tab.velocity[q];
                    for i in 0..nu {
                        for j in 0..nu {
                            let v = w * jets[i].value * jets[j].value;
                            for c in 0..2 {
                                a[(uix(c, i), uix(c, j))] += v;
                            }
                        }
                        for (m, &lm) in leg.iter().enumerate() {
                            let v = -w * jets[i].value * lm;
                            for c in 0..2 {
                                a[(uix(c, i), hix(s, c, m))] += v;
                                a[(hix(s, c, m), uix(c, i))] += v;
                            }
                        }
                    }
                    for (m, &lm) in leg.iter().enumerate() {
                        for (mm, &ln) in leg.iter().enumerate() {
                            let v = w * lm * ln;
                            for c in 0..2 {
                                a[(hix(s, c, m), hix(s, c, mm))] += v;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(LocalForms { matrix: a, nu, nf, np })
}

/// `pe[m][j]`: Legendre coefficient m of the P_k projection of the trace of
/// velocity function j on local edge `s`.
pub(crate) fn trace_projection_matrix<T: Real>(
    et: &EdgeTables<T>,
    s: usize,
    forward: bool,
    k: usize,
    nu: usize,
) -> Result<Vec<Vec<T>>> {
    let tab = et.side(s, forward);
    let mut pe = vec![vec![T::zero(); nu]; k + 1];
    let mut vals = vec![T::zero(); et.rule.len()];
    for j in 0..nu {
        for (q, v) in vals.iter_mut().enumerate() {
            *v = tab.velocity[q][j].value;
        }
        let c = edge_trace_projection(k, &vals, &et.rule)?;
        for m in 0..=k {
            pe[m][j] = c[m];
        }
    }
    Ok(pe)
}

/// (f, v) on the velocity rows; zero elsewhere. Uses the elevated rule.
pub fn local_load<T: Real, F>(
    mesh: &Mesh<T>,
    element: usize,
    spec: &SpaceSpec<T>,
    tables: &ReferenceTables<T>,
    f: &F,
) -> Result<Vec<T>>
where
    F: Fn(Point2<T>) -> [T; 2] + ?Sized,
{
    let geom = ElementGeometry::new(mesh, element)?;
    let nu = spec.nu();
    let mut out = vec![T::zero(); spec.local_dim()];
    for q in 0..tables.load.len() {
        let (xi, eta) = tables.load.reference_point(q);
        let fx = f(geom.map(xi, eta));
        let w = tables.load.weights[q] * geom.det;
        for (i, jet) in tables.load_velocity[q].iter().enumerate() {
            out[i] += w * fx[0] * jet.value;
            out[nu + i] += w * fx[1] * jet.value;
        }
    }
    Ok(out)
}
