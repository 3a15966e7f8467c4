//! Affinely-rigid body dynamics under Kirchhoff–Love constraints.
//!
//! The configuration `Φ = L·S` is split into a rotation `L` and a symmetric
//! positive-definite `S` whose in-plane block is `[[ξ, α], [α, ζ]]` and whose
//! normal entry is `ϱ`. The crate provides the kinematics, the Hamiltonian
//! flow in these polar variables, an explicit integrator, a solver for
//! stationary (rigidly rotating) ellipsoids and a command-line front end.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod integrator;
pub mod kinematics;
pub mod potentials;
pub mod stationary;

pub use error::{Error, Result};
