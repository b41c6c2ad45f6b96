//! Variational quantum circuits as function approximators for power-system
//! transient simulation.
//!
//! Each unknown of a differential(-algebraic) system is represented by a small
//! parameterized circuit whose measured expectation, after a classical
//! read-out polynomial, plays the role of the solution `y(t)`. Circuits are
//! simulated exactly on a dense statevector, with forward-mode tangents giving
//! `y′`, `y″` and every parameter gradient at machine precision. Parameters
//! are fitted with BFGS against a collocation loss, one time window after the
//! other, and every result can be compared with a fixed-step RK4 reference.
//!
//! Modules, bottom-up:
//!
//! - [`quantum`]: statevectors, gates and tangent propagation.
//! - [`models`]: the sinusoidal (two-qubit layered) and polynomial
//!   (amplitude-encoded) circuit families.
//! - [`systems`]: the single-machine swing equation and the three-machine
//!   network model in residual form.
//! - [`training`]: loss assembly, BFGS and windowed time marching.
//! - [`oracle`]: RK4 reference solutions, trajectories and MSE.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod jet;
pub mod models;
pub mod oracle;
pub mod quantum;
pub mod systems;
pub mod training;

pub use error::{Error, Result};
pub use jet::Jet;
