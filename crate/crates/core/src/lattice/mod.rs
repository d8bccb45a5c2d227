//! Parity vectors and exact closest-vector data at half-integral targets.

mod cvp;
mod parity;
mod phi;

pub use cvp::{
    closest_points, theta_vector, voronoi_relevant_vectors, vonorm, CvpResult, DegenerateClass,
    LatticeForm,
};
pub use parity::ParityVector;
pub use phi::compute_phi;
