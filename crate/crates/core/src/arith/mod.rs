//! Exact rational arithmetic: scalars, dense matrices, symmetric-matrix coordinates.

pub mod int;
mod matrix;
mod scalar;
mod sym;

pub use matrix::{ExactMatrix, Ldlt, ZeroPivot};
pub use scalar::ExactScalar;
pub use sym::{bilinear_functional, quadratic_functional, sym_dim, sym_entry, sym_index, SymCoordinates};
