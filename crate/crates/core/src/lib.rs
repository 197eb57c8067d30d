//! Conformally Euclidean superintegrable Hamiltonians in three dimensions.
//!
//! Four families share the form `H_μ = μ(q) H_e(q, p)` with a conformal
//! multiplier `μ` and a Euclidean Hamiltonian `H_e`. The crate provides their
//! integrals of motion, exact gradients via dual numbers, Poisson brackets,
//! flows, the curvature of the associated conformally flat metrics and a
//! numerical verification harness.

pub mod diff;
pub mod dual;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod observables;
pub mod sampling;
pub mod system;
pub mod verify;

pub use diff::{
    gradient, hamiltonian_vector_field, poisson_bracket, value_and_gradient, Hamiltonian,
    PhaseFunction,
};
pub use dual::{Dual, Scalar};
pub use error::{Error, Result};
pub use observables::{integrals, Axis, IntegralSet, Observable};
pub use system::{hamiltonian, mu, Family, PhasePoint, SystemSpec};
