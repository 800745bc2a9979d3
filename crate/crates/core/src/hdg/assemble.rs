use rayon::prelude::*;

use super::dofs::{DofMap, Slot};
use super::local::{local_forms, local_load, LocalForms};
use super::solution::HdgSolution;
use super::tables::ReferenceTables;
use super::SpaceSpec;
use crate::basis::edge_trace_projection;
use crate::error::Result;
use crate::exact::ExactSolution;
use crate::mesh::{Mesh, Point2};
use crate::quadrature::EdgeQuadRule;
use crate::scalar::Real;
use crate::solver::{CsrMatrix, LuOptions, SparseLu, SparseMatrix};

/// Assembled saddle-point system with boundary facet unknowns eliminated
/// and one multiplier row enforcing ∫_Ω p = 0.
///
/// The element blocks and loads are kept for condensation and for the
/// post-solve checks.
#[derive(Debug, Clone)]
pub struct GlobalSystem<'m, T> {
    pub mesh: &'m Mesh<T>,
    pub spec: SpaceSpec<T>,
    pub dof_map: DofMap,
    pub matrix: CsrMatrix<T>,
    pub rhs: Vec<T>,
    pub locals: Vec<LocalForms<T>>,
    pub loads: Vec<Vec<T>>,
    /// P_k(g) coefficients on boundary edges (component-major), empty on
    /// interior edges.
    pub boundary: Vec<Vec<T>>,
    /// ‖f‖_{0,Ω} + ‖P_k g‖_{0,∂Ω}.
    pub data_norm: T,
    pub tables: ReferenceTables<T>,
}

pub fn assemble<'m, T, F, G>(mesh: &'m Mesh<T>, spec: &SpaceSpec<T>, f: &F, g: &G) -> Result<GlobalSystem<'m, T>>
where
    T: Real,
    F: Fn(Point2<T>) -> [T; 2] + Sync + ?Sized,
    G: Fn(Point2<T>) -> [T; 2] + Sync + ?Sized,
{
    let tables = ReferenceTables::new(spec)?;
    let dof_map = DofMap::new(mesh, spec);
    let ne = mesh.num_triangles();

    let element_data: Vec<(LocalForms<T>, Vec<T>)> = (0..ne)
        .into_par_iter()
        .map(|k| Ok((local_forms(mesh, k, spec, &tables)?, local_load(mesh, k, spec, &tables, f)?)))
        .collect::<Result<_>>()?;
    let (locals, loads): (Vec<_>, Vec<_>) = element_data.into_iter().unzip();

    let boundary = project_boundary_data(mesh, spec, g)?;
    let data_norm = forcing_norm(mesh, &tables, f)? + boundary_norm(mesh, &boundary);

    let n = dof_map.dim();
    let nloc = spec.local_dim();
    let mut coo = SparseMatrix::with_capacity(n, n, ne * nloc * nloc / 2);
    let mut rhs = vec![T::zero(); n];
    for (k, (lf, load)) in locals.iter().zip(&loads).enumerate() {
        let slots = dof_map.element_slots(mesh, k);
        for (a, sa) in slots.iter().enumerate() {
            let Slot::Free(i) = *sa else { continue };
            rhs[i] += load[a];
            for (b, sb) in slots.iter().enumerate() {
                let v = lf.matrix[(a, b)];
                if v == T::zero() {
                    continue;
                }
                match *sb {
                    Slot::Free(j) => coo.push(i, j, v),
                    Slot::Fixed { edge, index } => rhs[i] -= v * boundary[edge][index],
                }
            }
        }
    }
    let lambda = dof_map.multiplier();
    for k in 0..ne {
        let c = mean_pressure_weight(mesh, k);
        let p0 = dof_map.pressure(k, 0);
        coo.push(lambda, p0, c);
        coo.push(p0, lambda, c);
    }

    Ok(GlobalSystem {
        mesh,
        spec: *spec,
        dof_map,
        matrix: coo.to_csr(),
        rhs,
        locals,
        loads,
        boundary,
        data_norm,
        tables,
    })
}

/// Assembles with f = −Δu + ∇p and g = u from an exact pair.
pub fn assemble_exact<'m, T: Real, E: ExactSolution<T> + ?Sized>(
    mesh: &'m Mesh<T>,
    spec: &SpaceSpec<T>,
    exact: &E,
) -> Result<GlobalSystem<'m, T>> {
    assemble(mesh, spec, &|x| exact.forcing(x), &|x| exact.velocity(x))
}

/// ∫_K ψ₀ for the constant pressure function ψ₀ = √2.
pub fn mean_pressure_weight<T: Real>(mesh: &Mesh<T>, element: usize) -> T {
    T::lit(2.0).sqrt() * mesh.signed_area(element).abs()
}

/// Edge-wise P_k projection of `g` on every edge; interior edges get an
/// empty vector.
pub(crate) fn project_boundary_data<T, G>(mesh: &Mesh<T>, spec: &SpaceSpec<T>, g: &G) -> Result<Vec<Vec<T>>>
where
    T: Real,
    G: Fn(Point2<T>) -> [T; 2] + Sync + ?Sized,
{
    let rule = EdgeQuadRule::for_degree(spec.load_degree().max(2 * spec.k + 2))?;
    mesh.edges
        .iter()
        .enumerate()
        .map(|(e, edge)| {
            if !edge.is_boundary {
                return Ok(Vec::new());
            }
            project_on_edge(mesh, e, spec.k, &rule, g)
        })
        .collect()
}

/// P_k projection of a vector field on edge `e`, component-major.
pub(crate) fn project_on_edge<T, G>(mesh: &Mesh<T>, e: usize, k: usize, rule: &EdgeQuadRule<T>, g: &G) -> Result<Vec<T>>
where
    T: Real,
    G: Fn(Point2<T>) -> [T; 2] + ?Sized,
{
    let [p0, p1] = mesh.edge_points(e);
    let vals: Vec<[T; 2]> = rule
        .points
        .iter()
        .map(|&t| g(p0 + (p1 - p0) * ((t + T::one()) * T::lit(0.5))))
        .collect();
    let mut out = Vec::with_capacity(2 * (k + 1));
    for c in 0..2 {
        let comp: Vec<T> = vals.iter().map(|v| v[c]).collect();
        out.extend(edge_trace_projection(k, &comp, rule)?);
    }
    Ok(out)
}

fn forcing_norm<T, F>(mesh: &Mesh<T>, tables: &ReferenceTables<T>, f: &F) -> Result<T>
where
    T: Real,
    F: Fn(Point2<T>) -> [T; 2] + Sync + ?Sized,
{
    let parts: Vec<T> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|k| {
            let geom = super::ElementGeometry::new(mesh, k)?;
            let mut s = T::zero();
            for q in 0..tables.load.len() {
                let (xi, eta) = tables.load.reference_point(q);
                let v = f(geom.map(xi, eta));
                s += tables.load.weights[q] * geom.det * (v[0] * v[0] + v[1] * v[1]);
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().sum::<T>().sqrt())
}

fn boundary_norm<T: Real>(mesh: &Mesh<T>, boundary: &[Vec<T>]) -> T {
    mesh.edges
        .iter()
        .zip(boundary)
        .map(|(e, c)| e.length * T::lit(0.5) * c.iter().map(|&x| x * x).sum::<T>())
        .sum::<T>()
        .sqrt()
}

pub fn solve_full<'m, T: Real>(sys: &GlobalSystem<'m, T>) -> Result<HdgSolution<'m, T>> {
    solve_full_with(sys, &LuOptions::default())
}

pub fn solve_full_with<'m, T: Real>(sys: &GlobalSystem<'m, T>, opts: &LuOptions) -> Result<HdgSolution<'m, T>> {
    let lu = SparseLu::factorize(&sys.matrix, opts)?;
    let (x, report) = lu.solve(&sys.rhs)?;
    let mut sol = HdgSolution::from_global(sys, &x);
    sol.report = Some(report);
    Ok(sol)
}
