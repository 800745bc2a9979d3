//! Sparse storage and a direct solver for symmetric indefinite systems.

mod lu;
mod matrix;
mod ordering;

pub use lu::{is_positive_definite, solve_sparse, LuOptions, OrderingKind, PivotPolicy, SolveReport, SparseLu};
pub use matrix::{CsrMatrix, SparseMatrix};
pub use ordering::nested_dissection;
