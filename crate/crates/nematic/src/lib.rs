//! Ericksen–Leslie coefficients derived from the Doi kinetic model of nematic
//! polymers, and a homogeneous kinetic simulator on the circle to test them.
//!
//! The pipeline runs from weighted quadrature on `(-1, 1)` through the Gibbs
//! equilibria and the generalized collision invariant to the Leslie viscosities,
//! stresses and director dynamics.

pub mod equilibria;
pub mod error;
pub mod gci;
pub mod kinetic;
pub mod leslie;
pub mod quadrature;
pub mod tensor;
pub mod verify;

pub use equilibria::ModelParams;
pub use error::{Error, Result};
