use super::assemble::{mean_pressure_weight, project_on_edge, GlobalSystem};
use super::dofs::{DofMap, Slot};
use super::geometry::ElementGeometry;
use super::SpaceSpec;
use crate::basis::TriBasis;
use crate::error::Result;
use crate::exact::ExactSolution;
use crate::mesh::Mesh;
use crate::quadrature::{tri_quadrature, EdgeQuadRule};
use crate::scalar::Real;
use crate::solver::SolveReport;

/// Discrete triple (u_h, û_h, p_h) in orthonormal coordinates.
///
/// `u[K]` holds u₁ then u₂ coefficients; `uhat[e]` holds the two components'
/// Legendre coefficients in the edge's global orientation, boundary edges
/// included; `p[K]` holds pressure coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct HdgSolution<'m, T> {
    pub mesh: &'m Mesh<T>,
    pub spec: SpaceSpec<T>,
    pub u: Vec<Vec<T>>,
    pub uhat: Vec<Vec<T>>,
    pub p: Vec<Vec<T>>,
    pub multiplier: T,
    pub report: Option<SolveReport>,
}

impl<'m, T: Real> HdgSolution<'m, T> {
    pub fn zeros(mesh: &'m Mesh<T>, spec: &SpaceSpec<T>) -> Self {
        Self {
            mesh,
            spec: *spec,
            u: vec![vec![T::zero(); 2 * spec.nu()]; mesh.num_triangles()],
            uhat: vec![vec![T::zero(); 2 * spec.nf()]; mesh.num_edges()],
            p: vec![vec![T::zero(); spec.np()]; mesh.num_triangles()],
            multiplier: T::zero(),
            report: None,
        }
    }

    /// Unpacks a global vector; boundary facets take the projected data.
    pub fn from_global(sys: &GlobalSystem<'m, T>, x: &[T]) -> Self {
        let mut sol = Self::zeros(sys.mesh, &sys.spec);
        let d = &sys.dof_map;
        let (nu, nf, np) = (sys.spec.nu(), sys.spec.nf(), sys.spec.np());
        for k in 0..sol.u.len() {
            for c in 0..2 {
                for i in 0..nu {
                    sol.u[k][c * nu + i] = x[d.velocity(k, c, i)];
                }
            }
            for l in 0..np {
                sol.p[k][l] = x[d.pressure(k, l)];
            }
        }
        for e in 0..sol.uhat.len() {
            for c in 0..2 {
                for m in 0..nf {
                    sol.uhat[e][c * nf + m] = match d.facet(e, c, m) {
                        Slot::Free(g) => x[g],
                        Slot::Fixed { edge, index } => sys.boundary[edge][index],
                    };
                }
            }
        }
        sol.multiplier = x[d.multiplier()];
        sol
    }

    /// Inverse of [`HdgSolution::from_global`] on the free unknowns.
    pub fn to_global(&self, d: &DofMap) -> Vec<T> {
        let (nu, nf, np) = (self.spec.nu(), self.spec.nf(), self.spec.np());
        let mut x = vec![T::zero(); d.dim()];
        for k in 0..self.u.len() {
            for c in 0..2 {
                for i in 0..nu {
                    x[d.velocity(k, c, i)] = self.u[k][c * nu + i];
                }
            }
            for l in 0..np {
                x[d.pressure(k, l)] = self.p[k][l];
            }
        }
        for e in 0..self.uhat.len() {
            for c in 0..2 {
                for m in 0..nf {
                    if let Slot::Free(g) = d.facet(e, c, m) {
                        x[g] = self.uhat[e][c * nf + m];
                    }
                }
            }
        }
        x[d.multiplier()] = self.multiplier;
        x
    }

    /// Element L² projections of u and p, edge P_k projection of the trace
    /// of u. Reproduces polynomial pairs of matching degree exactly.
    pub fn project<E: ExactSolution<T> + ?Sized>(mesh: &'m Mesh<T>, spec: &SpaceSpec<T>, exact: &E) -> Result<Self> {
        let mut sol = Self::zeros(mesh, spec);
        let vb = TriBasis::<T>::new(spec.k + 1)?;
        let pb = TriBasis::<T>::new(spec.k)?;
        let rule = tri_quadrature::<T>(spec.load_degree() + spec.k + 1)?;
        let table: Vec<(Vec<T>, Vec<T>)> = (0..rule.len())
            .map(|q| {
                let (x, y) = rule.reference_point(q);
                (vb.values(x, y), pb.values(x, y))
            })
            .collect();
        let nu = spec.nu();
        for k in 0..mesh.num_triangles() {
            let geom = ElementGeometry::new(mesh, k)?;
            for (q, (phi, psi)) in table.iter().enumerate() {
                let (xi, eta) = rule.reference_point(q);
                let x = geom.map(xi, eta);
                let u = exact.velocity(x);
                let p = exact.pressure(x);
                // ∫_K φ_i φ_j = 2|K| δ_ij = det J δ_ij, so weights need no Jacobian.
                let w = rule.weights[q];
                for i in 0..nu {
                    sol.u[k][i] += w * u[0] * phi[i];
                    sol.u[k][nu + i] += w * u[1] * phi[i];
                }
                for (l, &pl) in psi.iter().enumerate() {
                    sol.p[k][l] += w * p * pl;
                }
            }
        }
        let erule = EdgeQuadRule::for_degree(spec.load_degree().max(2 * spec.k + 2))?;
        for e in 0..mesh.num_edges() {
            sol.uhat[e] = project_on_edge(mesh, e, spec.k, &erule, &|x| exact.velocity(x))?;
        }
        Ok(sol)
    }

    /// Local vector in the element-matrix order [u | û edges 0..3 | p].
    pub fn local_vector(&self, element: usize) -> Vec<T> {
        let mut v = self.u[element].clone();
        for &e in &self.mesh.triangles[element].edges {
            v.extend_from_slice(&self.uhat[e]);
        }
        v.extend_from_slice(&self.p[element]);
        v
    }

    /// ∫_Ω p_h.
    pub fn pressure_integral(&self) -> T {
        (0..self.p.len())
            .map(|k| mean_pressure_weight(self.mesh, k) * self.p[k][0])
            .sum()
    }

    fn coefficients(&self) -> impl Iterator<Item = &T> {
        self.u
            .iter()
            .flatten()
            .chain(self.uhat.iter().flatten())
            .chain(self.p.iter().flatten())
    }

    /// Largest coefficient magnitude over u, û and p.
    pub fn max_abs(&self) -> T {
        self.coefficients().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    /// Largest coefficient difference over u, û and p.
    pub fn max_diff(&self, other: &Self) -> T {
        self.coefficients()
            .zip(other.coefficients())
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    /// Separate maxima for (u, û, p).
    pub fn max_diff_parts(&self, other: &Self) -> [T; 3] {
        let d = |a: &[Vec<T>], b: &[Vec<T>]| {
            a.iter()
                .flatten()
                .zip(b.iter().flatten())
                .fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs()))
        };
        [d(&self.u, &other.u), d(&self.uhat, &other.uhat), d(&self.p, &other.p)]
    }
}
