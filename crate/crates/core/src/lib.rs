//! Finite-difference toolkit for the Dirichlet problem of the complex
//! Monge-Ampere equation on domains in C^1 and C^2.
//!
//! Grids and domains live in [`grid`], the discrete complex Hessian and MA
//! measure in [`calculus`], reference forms and densities in [`geometry`],
//! the Newton / continuation solver in [`solver`], capacities and the
//! sublevel machinery in [`pluripotential`], and log-pole solutions in
//! [`singular`].

pub mod calculus;
pub mod error;
pub mod expr;
pub mod field_io;
pub mod geometry;
pub mod grid;
pub mod herm;
pub mod linalg;
pub mod pluripotential;
pub mod singular;
pub mod solver;

pub use calculus::{HermitianField, PshReport};
pub use error::{GeometryError, GridError, PluriError, SingularError, SolverError};
pub use geometry::{DensitySpec, ReferenceForms};
pub use grid::{BoundaryData, DomainMask, GridFunction, GridSpec, Label, ZPoint};
pub use herm::Herm;
pub use solver::{SolveConfig, SolveReport};
