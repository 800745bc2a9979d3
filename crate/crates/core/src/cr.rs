//! Crouzeix–Raviart P1-nonconforming / P0 Stokes solver and its link to the
//! lowest-order HDG method.
//!
//! With k = 0 the HDG facet unknowns and the CR midpoint values coincide,
//! and so do the pressures, whatever τ is. The right side (f, v) is
//! integrated with the same element map and rule as the HDG load, which
//! makes the identity hold to solver precision rather than quadrature
//! precision.

use crate::basis::TriBasis;
use crate::error::{Error, Result};
use crate::hdg::{project_on_edge, ElementGeometry, HdgSolution, SpaceSpec, DEFAULT_QUAD_BOOST};
use crate::mesh::{Mesh, Point2};
use crate::quadrature::{tri_quadrature, EdgeQuadRule};
use crate::scalar::Real;
use crate::solver::{is_positive_definite, CsrMatrix, LuOptions, SolveReport, SparseLu, SparseMatrix};

/// Midpoint velocities per edge and one pressure value per element.
#[derive(Debug, Clone, PartialEq)]
pub struct CrSolution<'m, T> {
    pub mesh: &'m Mesh<T>,
    pub velocity: Vec<[T; 2]>,
    pub pressure: Vec<T>,
    pub multiplier: T,
    pub report: Option<SolveReport>,
}

/// Physical gradients of the three local basis functions φ_s = 1 − 2λ_s,
/// where φ_s equals 1 at the midpoint of edge s (opposite vertex s).
fn basis_gradients<T: Real>(geom: &ElementGeometry<T>) -> [[T; 2]; 3] {
    let two = T::lit(2.0);
    let reference = [[-T::one(), -T::one()], [T::one(), T::zero()], [T::zero(), T::one()]];
    reference.map(|g| {
        let p = geom.grad(g);
        [-two * p[0], -two * p[1]]
    })
}

fn basis_values<T: Real>(xi: T, eta: T) -> [T; 3] {
    let two = T::lit(2.0);
    [T::one() - two * (T::one() - xi - eta), T::one() - two * xi, T::one() - two * eta]
}

impl<'m, T: Real> CrSolution<'m, T> {
    /// ∇u* on `element`, `g[i][j] = ∂_j u_i`.
    pub fn gradient(&self, element: usize) -> Result<[[T; 2]; 2]> {
        let geom = ElementGeometry::new(self.mesh, element)?;
        let grads = basis_gradients(&geom);
        let mut g = [[T::zero(); 2]; 2];
        for (s, &e) in self.mesh.triangles[element].edges.iter().enumerate() {
            for c in 0..2 {
                g[c][0] += self.velocity[e][c] * grads[s][0];
                g[c][1] += self.velocity[e][c] * grads[s][1];
            }
        }
        Ok(g)
    }

    /// u* at reference coordinates of `element`.
    pub fn value(&self, element: usize, xi: T, eta: T) -> [T; 2] {
        let phi = basis_values(xi, eta);
        let mut v = [T::zero(); 2];
        for (s, &e) in self.mesh.triangles[element].edges.iter().enumerate() {
            for c in 0..2 {
                v[c] += self.velocity[e][c] * phi[s];
            }
        }
        v
    }

    /// Σ_K |K| p_K.
    pub fn pressure_integral(&self) -> T {
        self.pressure
            .iter()
            .enumerate()
            .map(|(k, &p)| self.mesh.signed_area(k).abs() * p)
            .sum()
    }

    /// max_K |∫_K div u*|, the residual of the discrete divergence constraint.
    pub fn divergence_residual(&self) -> T {
        let mut worst = T::zero();
        for k in 0..self.mesh.num_triangles() {
            let area = self.mesh.signed_area(k).abs();
            if let Ok(g) = self.gradient(k) {
                worst = worst.max((area * (g[0][0] + g[1][1])).abs());
            }
        }
        worst
    }
}

/// Assembled CR saddle-point system, unknowns ordered
/// [u₁ on interior edges | u₂ on interior edges | p per element | λ].
#[derive(Debug, Clone)]
pub struct CrSystem<'m, T> {
    pub mesh: &'m Mesh<T>,
    pub matrix: CsrMatrix<T>,
    pub rhs: Vec<T>,
    /// Edge-mean boundary data; zero on interior edges.
    pub boundary: Vec<[T; 2]>,
    /// Position of each edge among the interior edges.
    pub interior: Vec<Option<usize>>,
    pub num_interior: usize,
}

impl<'m, T: Real> CrSystem<'m, T> {
    pub fn velocity_dofs(&self) -> usize {
        2 * self.num_interior
    }

    /// The velocity-velocity block (vector Laplacian).
    pub fn velocity_block(&self) -> CsrMatrix<T> {
        let n = self.velocity_dofs();
        let mut coo = SparseMatrix::new(n, n);
        for i in 0..n {
            let (cols, vals) = self.matrix.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if j < n {
                    coo.push(i, j, v);
                }
            }
        }
        coo.to_csr()
    }

    pub fn velocity_block_is_positive_definite(&self) -> bool {
        is_positive_definite(&self.velocity_block())
    }
}

/// Assembles the CR system for forcing `f` and Dirichlet data `g`, which
/// enters through its edge means. The load uses the triangle rule of
/// exactness 2 + `quad_boost`, as the k = 0 HDG load does.
pub fn assemble_cr<'m, T, F, G>(mesh: &'m Mesh<T>, f: &F, g: &G, quad_boost: usize) -> Result<CrSystem<'m, T>>
where
    T: Real,
    F: Fn(Point2<T>) -> [T; 2] + ?Sized,
    G: Fn(Point2<T>) -> [T; 2] + ?Sized,
{
    let ne = mesh.num_triangles();
    let mut interior = vec![None; mesh.num_edges()];
    let mut ni = 0;
    for (e, edge) in mesh.edges.iter().enumerate() {
        if !edge.is_boundary {
            interior[e] = Some(ni);
            ni += 1;
        }
    }
    // Edge mean = (coefficient of the orthonormal constant L₀ = 1/√2) / √2.
    let erule = EdgeQuadRule::for_degree(2 + quad_boost)?;
    let inv_sqrt2 = T::lit(0.5).sqrt();
    let mut boundary = vec![[T::zero(); 2]; mesh.num_edges()];
    for (e, edge) in mesh.edges.iter().enumerate() {
        if edge.is_boundary {
            let c = project_on_edge(mesh, e, 0, &erule, g)?;
            boundary[e] = [c[0] * inv_sqrt2, c[1] * inv_sqrt2];
        }
    }

    let rule = tri_quadrature::<T>(2 + quad_boost)?;
    let n = 2 * ni + ne + 1;
    let lambda = n - 1;
    let mut coo = SparseMatrix::with_capacity(n, n, 30 * ne);
    let mut rhs = vec![T::zero(); n];
    let slot = |e: usize, c: usize| interior[e].map(|i| c * ni + i);
    for k in 0..ne {
        let geom = ElementGeometry::new(mesh, k)?;
        let grads = basis_gradients(&geom);
        let edges = mesh.triangles[k].edges;
        let area = geom.area;
        let pk = 2 * ni + k;

        let mut load = [[T::zero(); 2]; 3];
        for q in 0..rule.len() {
            let (xi, eta) = rule.reference_point(q);
            let fx = f(geom.map(xi, eta));
            let w = rule.weights[q] * geom.det;
            let phi = basis_values(xi, eta);
            for s in 0..3 {
                load[s][0] += w * fx[0] * phi[s];
                load[s][1] += w * fx[1] * phi[s];
            }
        }

        for s in 0..3 {
            for c in 0..2 {
                let Some(i) = slot(edges[s], c) else { continue };
                rhs[i] += load[s][c];
                for t in 0..3 {
                    let a = area * (grads[s][0] * grads[t][0] + grads[s][1] * grads[t][1]);
                    match slot(edges[t], c) {
                        Some(j) => coo.push(i, j, a),
                        None => rhs[i] -= a * boundary[edges[t]][c],
                    }
                }
                // −(div v, p): ∫_K ∂_c φ_s = |K| ∂_c φ_s.
                let b = -area * grads[s][c];
                coo.push(i, pk, b);
                coo.push(pk, i, b);
            }
        }
        for t in 0..3 {
            if interior[edges[t]].is_none() {
                for c in 0..2 {
                    rhs[pk] += area * grads[t][c] * boundary[edges[t]][c];
                }
            }
        }
        coo.push(lambda, pk, area);
        coo.push(pk, lambda, area);
    }
    Ok(CrSystem {
        mesh,
        matrix: coo.to_csr(),
        rhs,
        boundary,
        interior,
        num_interior: ni,
    })
}

/// Homogeneous boundary data and the default load rule.
pub fn solve_cr<'m, T, F>(mesh: &'m Mesh<T>, f: &F) -> Result<CrSolution<'m, T>>
where
    T: Real,
    F: Fn(Point2<T>) -> [T; 2] + ?Sized,
{
    let zero = |_: Point2<T>| [T::zero(); 2];
    solve_cr_system(&assemble_cr(mesh, f, &zero, DEFAULT_QUAD_BOOST)?, &LuOptions::default())
}

pub fn solve_cr_system<'m, T: Real>(sys: &CrSystem<'m, T>, opts: &LuOptions) -> Result<CrSolution<'m, T>> {
    let lu = SparseLu::factorize(&sys.matrix, opts)?;
    let (x, report) = lu.solve(&sys.rhs)?;
    let ni = sys.num_interior;
    let velocity = sys
        .interior
        .iter()
        .zip(&sys.boundary)
        .map(|(slot, b)| match slot {
            Some(i) => [x[*i], x[ni + i]],
            None => *b,
        })
        .collect();
    let ne = sys.mesh.num_triangles();
    Ok(CrSolution {
        mesh: sys.mesh,
        velocity,
        pressure: x[2 * ni..2 * ni + ne].to_vec(),
        multiplier: x[2 * ni + ne],
        report: Some(report),
    })
}

/// Π*û at edge midpoints: the edge mean of û. Defined for k = 0 only.
pub fn cr_interpolate<T: Real>(hdg: &HdgSolution<'_, T>) -> Result<Vec<[T; 2]>> {
    if hdg.spec.k != 0 {
        return Err(Error::InvalidArgument(format!(
            "the Crouzeix-Raviart interpolant needs k = 0, got k = {}",
            hdg.spec.k
        )));
    }
    let inv_sqrt2 = T::lit(0.5).sqrt();
    Ok(hdg.uhat.iter().map(|c| [c[0] * inv_sqrt2, c[1] * inv_sqrt2]).collect())
}

/// Maximum pointwise differences between a k = 0 HDG solution and a CR
/// solution on the same mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrDiscrepancy<T> {
    /// max over edges and components of |Π*û_h − u*| at the midpoint.
    pub midpoint: T,
    /// max over elements of |p_h − p*|.
    pub pressure: T,
}

fn check_pair<T: Real>(hdg: &HdgSolution<'_, T>, cr: &CrSolution<'_, T>) -> Result<()> {
    if !(std::ptr::eq(hdg.mesh, cr.mesh) || hdg.mesh == cr.mesh) {
        return Err(Error::MeshMismatch);
    }
    if hdg.spec.k != 0 {
        return Err(Error::InvalidArgument(format!(
            "comparison with Crouzeix-Raviart needs k = 0, got k = {}",
            hdg.spec.k
        )));
    }
    Ok(())
}

pub fn compare_with_hdg<T: Real>(hdg: &HdgSolution<'_, T>, cr: &CrSolution<'_, T>) -> Result<CrDiscrepancy<T>> {
    check_pair(hdg, cr)?;
    let mid = cr_interpolate(hdg)?;
    let midpoint = mid
        .iter()
        .zip(&cr.velocity)
        .fold(T::zero(), |m, (a, b)| m.max((a[0] - b[0]).abs()).max((a[1] - b[1]).abs()));
    // ψ₀ = √2 on the reference triangle.
    let sqrt2 = T::lit(2.0).sqrt();
    let pressure = hdg
        .p
        .iter()
        .zip(&cr.pressure)
        .fold(T::zero(), |m, (ph, &pc)| m.max((ph[0] * sqrt2 - pc).abs()));
    Ok(CrDiscrepancy { midpoint, pressure })
}

/// Norm distances between the HDG element fields and the CR solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrDistance<T> {
    /// |u* − u_h|_{1,h}.
    pub h1_velocity: T,
    /// ‖p* − p_h‖.
    pub l2_pressure: T,
}

pub fn distance_to_hdg<T: Real>(hdg: &HdgSolution<'_, T>, cr: &CrSolution<'_, T>) -> Result<CrDistance<T>> {
    check_pair(hdg, cr)?;
    let spec: SpaceSpec<T> = hdg.spec;
    let basis = TriBasis::<T>::new(spec.k + 1)?;
    // P1 gradients are constant; any point will do.
    let jets = basis.jets(T::lit(1.0 / 3.0), T::lit(1.0 / 3.0));
    let nu = spec.nu();
    let sqrt2 = T::lit(2.0).sqrt();
    let mut h1 = T::zero();
    let mut l2 = T::zero();
    for k in 0..hdg.mesh.num_triangles() {
        let geom = ElementGeometry::new(hdg.mesh, k)?;
        let gc = cr.gradient(k)?;
        for c in 0..2 {
            let mut d = gc[c];
            for (i, jet) in jets.iter().enumerate() {
                let g = geom.grad(jet.grad);
                d[0] -= hdg.u[k][c * nu + i] * g[0];
                d[1] -= hdg.u[k][c * nu + i] * g[1];
            }
            h1 += geom.area * (d[0] * d[0] + d[1] * d[1]);
        }
        let dp = cr.pressure[k] - hdg.p[k][0] * sqrt2;
        l2 += geom.area * dp * dp;
    }
    Ok(CrDistance {
        h1_velocity: h1.sqrt(),
        l2_pressure: l2.sqrt(),
    })
}
