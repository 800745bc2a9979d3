//! Residual-type checks of the discrete forms against exact data.

use rayon::prelude::*;

use super::assemble::{project_on_edge, GlobalSystem};
use super::geometry::{EdgeSide, ElementGeometry};
use super::local::local_forms;
use super::solution::HdgSolution;
use super::tables::ReferenceTables;
use super::SpaceSpec;
use crate::error::Result;
use crate::exact::{ExactSolution, PolyField};
use crate::mesh::Mesh;
use crate::quadrature::{tri_quadrature, EdgeQuadRule};
use crate::scalar::Real;

/// Maxima of the two residual families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyResidual<T> {
    /// max over velocity and interior facet test functions of
    /// |a_h(u, u|_Γ; φ) + b_h(φ; p) − (f, φ)|.
    pub momentum: T,
    /// max over pressure test functions of |b_h(u, u|_Γ; q)|.
    pub continuity: T,
}

impl<T: Real> ConsistencyResidual<T> {
    pub fn max(&self) -> T {
        self.momentum.max(self.continuity)
    }
}

/// Inserts the exact pair with û = u|_Γ into the discrete equations. With
/// û equal to the trace the penalty and the ⟨∂ₙv, û − u⟩ terms vanish, so
/// only the volume terms, ⟨∂ₙu, v̂ − v⟩ and the pressure edge term remain.
/// Integrals use the elevated rule of `spec`.
pub fn consistency_residual<T: Real, E: ExactSolution<T> + ?Sized>(
    exact: &E,
    mesh: &Mesh<T>,
    spec: &SpaceSpec<T>,
) -> Result<ConsistencyResidual<T>> {
    let tables = ReferenceTables::new(spec)?;
    let et = tables.edge_tables_for_degree(spec.load_degree())?;
    let (nu, nf) = (spec.nu(), spec.nf());

    type Contribution<T> = (Vec<T>, T, Vec<(usize, Vec<T>)>);
    let per_element: Vec<Contribution<T>> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|k| {
            let geom = ElementGeometry::new(mesh, k)?;
            let mut r = vec![T::zero(); 2 * nu];
            let mut cont = vec![T::zero(); spec.np()];
            for q in 0..tables.load.len() {
                let (xi, eta) = tables.load.reference_point(q);
                let x = geom.map(xi, eta);
                let g = exact.velocity_gradient(x);
                let p = exact.pressure(x);
                let f = exact.forcing(x);
                let w = tables.load.weights[q] * geom.det;
                for (i, jet) in tables.load_velocity[q].iter().enumerate() {
                    let gi = geom.grad(jet.grad);
                    for c in 0..2 {
                        r[c * nu + i] += w * (g[c][0] * gi[0] + g[c][1] * gi[1] - gi[c] * p - f[c] * jet.value);
                    }
                }
                let div = g[0][0] + g[1][1];
                for (l, &pl) in tables.load_pressure[q].iter().enumerate() {
                    cont[l] -= w * div * pl;
                }
            }
            let mut facets = Vec::new();
            for (s, side) in EdgeSide::all(mesh, k).into_iter().enumerate() {
                let tab = et.side(s, side.forward);
                let n = [side.normal.x, side.normal.y];
                let ds = side.length * T::lit(0.5);
                let mut fr = vec![T::zero(); 2 * nf];
                for (q, &wq) in et.rule.weights.iter().enumerate() {
                    let (xi, eta) = tab.reference_points[q];
                    let x = geom.map(xi, eta);
                    let g = exact.velocity_gradient(x);
                    let p = exact.pressure(x);
                    let w = wq * ds;
                    for c in 0..2 {
                        let dn = g[c][0] * n[0] + g[c][1] * n[1];
                        for (i, jet) in tab.velocity[q].iter().enumerate() {
                            r[c * nu + i] += w * jet.value * (p * n[c] - dn);
                        }
                        for (m, &lm) in et.legendre[q].iter().enumerate() {
                            fr[c * nf + m] += w * (dn - p * n[c]) * lm;
                        }
                    }
                }
                if !side.is_boundary {
                    facets.push((side.edge, fr));
                }
            }
            let cmax = cont.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
            Ok((r, cmax, facets))
        })
        .collect::<Result<_>>()?;

    let mut facet_res = vec![vec![T::zero(); 2 * nf]; mesh.num_edges()];
    let mut momentum = T::zero();
    let mut continuity = T::zero();
    for (r, c, facets) in per_element {
        momentum = r.iter().fold(momentum, |m, &v| m.max(v.abs()));
        continuity = continuity.max(c);
        for (e, fr) in facets {
            for (a, b) in facet_res[e].iter_mut().zip(fr) {
                *a += b;
            }
        }
    }
    momentum = facet_res.iter().flatten().fold(momentum, |m, &v| m.max(v.abs()));
    Ok(ConsistencyResidual { momentum, continuity })
}

/// max over pressure basis functions q of |b_h(Πv, Π̂v; q) + (div v, q)|,
/// with Π, Π̂ the element P_{k+1} and edge P_k L² projections.
pub fn fortin_check<T: Real>(field: &PolyField<T>, mesh: &Mesh<T>, spec: &SpaceSpec<T>) -> Result<T> {
    let tables = ReferenceTables::new(spec)?;
    let deg = field.degree();
    let rule = tri_quadrature::<T>(deg + spec.k + 1)?;
    let erule = EdgeQuadRule::for_degree((deg + spec.k).max(2 * spec.k + 2))?;
    let nu = spec.nu();
    let vtab: Vec<Vec<T>> = (0..rule.len())
        .map(|q| {
            let (x, y) = rule.reference_point(q);
            tables.velocity.values(x, y)
        })
        .collect();
    let ptab: Vec<Vec<T>> = (0..rule.len())
        .map(|q| {
            let (x, y) = rule.reference_point(q);
            tables.pressure.values(x, y)
        })
        .collect();
    let edge_proj: Vec<Vec<T>> = (0..mesh.num_edges())
        .map(|e| project_on_edge(mesh, e, spec.k, &erule, &|x| field.value(x)))
        .collect::<Result<_>>()?;

    let defects: Vec<T> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|k| {
            let geom = ElementGeometry::new(mesh, k)?;
            let lf = local_forms(mesh, k, spec, &tables)?;
            let mut lv = vec![T::zero(); lf.dim()];
            let mut div_q = vec![T::zero(); spec.np()];
            for q in 0..rule.len() {
                let (xi, eta) = rule.reference_point(q);
                let x = geom.map(xi, eta);
                let v = field.value(x);
                let w = rule.weights[q];
                for i in 0..nu {
                    lv[i] += w * v[0] * vtab[q][i];
                    lv[nu + i] += w * v[1] * vtab[q][i];
                }
                let d = field.divergence(x);
                for (l, &pl) in ptab[q].iter().enumerate() {
                    div_q[l] += w * geom.det * d * pl;
                }
            }
            for (s, &e) in mesh.triangles[k].edges.iter().enumerate() {
                let r = lf.edge_range(s);
                lv[r].copy_from_slice(&edge_proj[e]);
            }
            let mut worst = T::zero();
            for (l, row) in lf.p_range().enumerate() {
                let b: T = (0..lf.p_range().start).map(|j| lf.matrix[(row, j)] * lv[j]).sum();
                worst = worst.max((b + div_q[l]).abs());
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    Ok(defects.into_iter().fold(T::zero(), |m, v| m.max(v)))
}

/// max over elements and pressure basis functions of |b_h(u_h, û_h; q)|.
pub fn divergence_residual<T: Real>(sys: &GlobalSystem<'_, T>, sol: &HdgSolution<'_, T>) -> T {
    let mut worst = T::zero();
    for (k, lf) in sys.locals.iter().enumerate() {
        let lv = sol.local_vector(k);
        let pr = lf.p_range();
        for row in pr.clone() {
            let b: T = (0..pr.start).map(|j| lf.matrix[(row, j)] * lv[j]).sum();
            worst = worst.max(b.abs());
        }
    }
    worst
}

/// a_h(v, v̂; v, v̂) for the velocity part of `sol`.
pub fn a_h_value<T: Real>(sys: &GlobalSystem<'_, T>, sol: &HdgSolution<'_, T>) -> T {
    let mut total = T::zero();
    for (k, lf) in sys.locals.iter().enumerate() {
        let lv = sol.local_vector(k);
        let n = lf.p_range().start;
        for i in 0..n {
            if lv[i] == T::zero() {
                continue;
            }
            let row: T = (0..n).map(|j| lf.matrix[(i, j)] * lv[j]).sum();
            total += lv[i] * row;
        }
    }
    total
}
