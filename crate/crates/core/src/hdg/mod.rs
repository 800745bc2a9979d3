//! Reduced-stabilization HDG discretization of the Stokes problem.
//!
//! Element velocity in P_{k+1}, facet velocity in P_k on every edge,
//! element pressure in P_k. The stabilization penalizes only the P_k
//! projection of the trace mismatch û − u.

mod assemble;
mod checks;
mod dofs;
mod geometry;
mod local;
mod solution;
mod tables;

pub use assemble::{assemble, assemble_exact, mean_pressure_weight, solve_full, solve_full_with, GlobalSystem};
pub use checks::{
    a_h_value, consistency_residual, divergence_residual, fortin_check,
    ConsistencyResidual,
};
pub use dofs::{DofMap, Slot};
pub use geometry::{EdgeSide, ElementGeometry};
pub use local::{local_forms, local_load, LocalForms};
pub(crate) use assemble::project_on_edge;
pub(crate) use local::trace_projection_matrix;
pub use solution::HdgSolution;
pub use tables::{EdgeTables, ReferenceTables, SideTable};

use crate::basis::tri_dim;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MAX_K: usize = 2;

/// How the trace mismatch is penalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stabilization {
    /// τ/h_e ⟨P_k(û − u), P_k(v̂ − v)⟩, the reduced method.
    #[default]
    Projected,
    /// τ/h_e ⟨û − u, v̂ − v⟩ integrated with the (k+1)-point Gauss rule.
    /// Coincides with `Projected` because L_{k+1} vanishes at those points.
    ReducedQuadrature,
    /// τ/h_e ⟨û − u, v̂ − v⟩ integrated exactly (standard HDG penalty).
    Unprojected,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceSpec<T> {
    pub k: usize,
    pub tau: T,
    pub stabilization: Stabilization,
    /// Extra triangle-rule exactness for loads and errors.
    pub quad_boost: usize,
}

pub const DEFAULT_QUAD_BOOST: usize = 4;

impl<T: Real> SpaceSpec<T> {
    /// Default τ = 10 (k + 1)².
    pub fn new(k: usize) -> Result<Self> {
        Self::with_tau(k, Self::default_tau(k))
    }

    pub fn with_tau(k: usize, tau: T) -> Result<Self> {
        if k > MAX_K {
            return Err(Error::UnsupportedDegree { degree: k, max: MAX_K });
        }
        if !(tau >= T::one()) || !tau.is_finite() {
            return Err(Error::InvalidArgument(format!("tau must be finite and at least 1, got {tau}")));
        }
        Ok(Self {
            k,
            tau,
            stabilization: Stabilization::Projected,
            quad_boost: DEFAULT_QUAD_BOOST,
        })
    }

    pub fn default_tau(k: usize) -> T {
        T::lit(10.0 * ((k + 1) * (k + 1)) as f64)
    }

    pub fn stabilization(mut self, s: Stabilization) -> Self {
        self.stabilization = s;
        self
    }

    pub fn quad_boost(mut self, boost: usize) -> Self {
        self.quad_boost = boost;
        self
    }

    pub fn velocity_degree(&self) -> usize {
        self.k + 1
    }

    /// Scalar velocity functions per element.
    pub fn nu(&self) -> usize {
        tri_dim(self.k + 1)
    }

    /// Scalar facet functions per edge.
    pub fn nf(&self) -> usize {
        self.k + 1
    }

    pub fn np(&self) -> usize {
        tri_dim(self.k)
    }

    pub fn element_velocity_dofs(&self) -> usize {
        2 * self.nu()
    }

    pub fn edge_facet_dofs(&self) -> usize {
        2 * self.nf()
    }

    /// Size of the element matrix: u, three edges of û, p.
    pub fn local_dim(&self) -> usize {
        2 * self.nu() + 3 * self.edge_facet_dofs() + self.np()
    }

    /// Triangle exactness for stiffness and divergence terms.
    pub fn assembly_degree(&self) -> usize {
        2 * (self.k + 1)
    }

    /// Triangle exactness for loads and error integrals.
    pub fn load_degree(&self) -> usize {
        self.assembly_degree() + self.quad_boost
    }
}
