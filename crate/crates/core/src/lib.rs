//! Outer and inner bounds for bilinear optimization over polytopal
//! state spaces, built on symmetric extensions of the maximal tensor product.

pub mod config;
pub mod dd;
pub mod entropy;
pub mod error;
pub mod games;
pub mod geometry;
pub mod hash;
pub mod hierarchy;
pub mod linalg;
pub mod rounding;
pub mod solver;
pub mod tensor;

pub use config::{Caps, Ctx, Tolerances};
pub use error::{Error, Result};
pub use geometry::StateSpace;
