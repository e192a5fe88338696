//! Taylor–Hood finite elements for the stationary convective
//! Brinkman–Forchheimer extended Darcy (CBFeD) equations with a nonmonotone
//! slip boundary condition, plus a projected-subgradient optimal control
//! driver.

pub mod dense;
pub mod error;
pub mod experiment;
pub mod fem;
pub mod forms;
pub mod friction;
pub mod mesh;
pub mod optimize;
pub mod verify;
pub mod solver;
pub mod sparse;

pub use error::{Error, Result};
