//! Finite element solver for the Cahn-Hilliard-Biot equations on the unit
//! square.
//!
//! The phase-field and chemical potential use P1 elements, displacement
//! vector P1, pressure P0 and flux lowest-order Raviart-Thomas. Each time
//! step can be solved monolithically with Newton's method or by iterating
//! over the three subsystems.

pub mod cli;
pub mod fem;
pub mod linalg;
pub mod mesh;
pub mod model;
pub mod solvers;

pub use mesh::StructuredTriMesh;
pub use model::MaterialParams;
pub use solvers::{ChbProblem, FieldState, SolverConfig, Strategy};
