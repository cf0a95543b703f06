//! Library for solving the job reassignment problem by minimizing a QUBO
//! cost function.
//!
//! The flow mirrors how the pieces fit together: [`model`] describes
//! instances, [`heuristics`] shrinks the variable grid and splits vacants
//! into priority bands, [`qubo`] turns candidate pairs into a coefficient
//! matrix (with an Ising conversion for spin-based backends), [`solvers`]
//! minimizes it, and [`pipeline`] iterates bands while rolling freshly
//! vacated jobs forward. [`generate`] builds random instances for tests and
//! benchmarks.

pub mod error;
pub mod generate;
pub mod heuristics;
pub mod model;
pub mod pipeline;
pub mod qubo;
pub mod solvers;

pub use error::{Error, Result};
