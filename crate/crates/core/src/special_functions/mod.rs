//! Stable evaluation of the real orthonormal bases on the circle, the sphere
//! and the rotation group.

pub mod basis;
pub mod legendre;
pub mod wigner;

pub use basis::{eval_all, eval_all_into, eval_basis, eval_basis_block, BasisEvaluator};
pub use wigner::{rotation_block, rotation_blocks, wigner_d, wigner_d_all};
