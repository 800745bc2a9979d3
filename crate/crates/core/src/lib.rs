//! Reduced-stabilization hybridized discontinuous Galerkin method for the
//! two-dimensional Stokes problem, with a Crouzeix–Raviart reference solver
//! and the instruments used to verify convergence and limit behaviour.
//!
//! Everything is generic over the scalar type through [`scalar::Real`]
//! (implemented for `f32` and `f64`); the aliases below fix `f64`.

pub mod analysis;
pub mod basis;
pub mod condensation;
pub mod cr;
pub mod dense;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod hdg;
pub mod mesh;
pub mod quadrature;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Point = mesh::Point2<f64>;
pub type Mesh64 = mesh::Mesh<f64>;
pub type Mesh32 = mesh::Mesh<f32>;
pub type SpaceSpec64 = hdg::SpaceSpec<f64>;
pub type GlobalSystem64<'m> = hdg::GlobalSystem<'m, f64>;
pub type HdgSolution64<'m> = hdg::HdgSolution<'m, f64>;
pub type CsrMatrix64 = solver::CsrMatrix<f64>;
