//! Nonconforming Crouzeix-Raviart velocity / continuous P1 pressure finite elements
//! for the two-dimensional Stokes equations on the unit square.
//!
//! Every numerical routine is generic over a [`Real`] scalar; the `*64` aliases
//! below fix it to `f64`, which is what the studies and the CLI use.

pub mod analysis;
pub mod assembly;
pub mod error;
pub mod fe;
pub mod mesh;
pub mod norms;
pub mod report;
pub mod scalar;
pub mod solutions;
pub mod solver;
pub mod study;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Mesh64 = mesh::Mesh<f64>;
pub type Mesh32 = mesh::Mesh<f32>;
pub type SparseSystem64 = assembly::SparseSystem<f64>;
pub type DiscreteField64 = assembly::DiscreteField<f64>;
pub type SaddleSolution64 = solver::SaddleSolution<f64>;
pub type ManufacturedSolution64 = solutions::ManufacturedSolution<f64>;
pub type InfSupReport64 = analysis::InfSupReport<f64>;
