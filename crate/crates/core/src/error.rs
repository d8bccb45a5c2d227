use thiserror::Error;

/// Errors raised by the exact geometry and enumeration routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    /// `pivot` is zero-based; the message reports it one-based.
    #[error("form is not positive definite (pivot {} is {value})", pivot + 1)]
    NotPositiveDefinite {
        pivot: usize,
        value: crate::ExactScalar,
    },

    #[error("form is not positive semidefinite")]
    NotSemidefinite,

    #[error("vector system does not span the ambient space")]
    NotSpanning,

    #[error("cone has no interior point (zero cone)")]
    EmptyInterior,

    #[error("non-primitive form: {} degenerate parity classes", .0.len())]
    NonPrimitive(Vec<crate::lattice::DegenerateClass>),

    #[error("facet is not an irredundant facet of the configuration cone")]
    UnknownFacet,

    #[error("configuration failed validation: {0}")]
    Validation(String),

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Other(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
