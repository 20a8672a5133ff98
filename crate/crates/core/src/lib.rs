//! Differential-equation solvers built on differentiable quantum circuits.
//!
//! Three trial-function families share one dense statevector simulator:
//! the original circuit model, a trainable observable over a precomputed
//! measurement table, and a flipped model trained from classical shadows.
//! Every quantum evaluation they would need on hardware is charged to an
//! [`training::EvalCounter`].

pub mod circuits;
pub mod differentiation;
pub mod error;
pub mod models;
pub mod pauli;
pub mod problems;
pub mod shadows;
pub mod statevector;
pub mod training;

pub use error::{Error, Result};
