//! Harmonic exponential families on the circle, the sphere and SO(3).

pub mod bayes_rotation;
pub mod data_io;
pub mod error;
pub mod expfam;
pub mod manifold;
pub mod optimize;
pub mod rotation;
pub mod special_functions;
pub mod transforms;

pub use error::{Error, Result};
pub use manifold::{BasisIndex, Manifold, ManifoldPoint};
pub use rotation::Rotation;
