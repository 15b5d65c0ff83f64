//! Nonconforming H2 tetrahedral elements for the clamped biharmonic problem.

pub mod assembly;
pub mod barypoly;
pub mod element;
pub mod error;
pub mod estimate;
pub mod geometry;
pub mod linalg;
pub mod mesh;
pub mod quadrature;
pub mod scalar;
pub mod solve;
pub mod verify;

pub use error::{Error, Result};
