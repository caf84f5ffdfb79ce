//! Entropy-stable DG spectral element solver for the 2D compressible Euler
//! equations on Cartesian and curvilinear quadrilateral meshes, with a
//! projection-based oscillation-eliminating filter gated by a shock
//! indicator.

pub mod cases;
pub mod dgsem;
pub mod error;
mod linalg;
pub mod mesh;
pub mod par;
pub mod physics;
pub mod refops;

pub use error::{Error, Result};
