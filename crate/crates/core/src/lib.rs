pub mod arith;
pub mod enumeration;
pub mod equivalence;
pub mod error;
pub mod isoedge;
pub mod lattice;
pub mod polyhedra;
pub mod tropical;

pub use arith::{ExactMatrix, ExactScalar, SymCoordinates};
pub use error::{Error, Result};
