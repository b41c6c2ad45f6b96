//! Exact statevector simulation with forward-mode tangents.
//!
//! Every gate application pushes the state and its derivatives along the
//! circuit input `x` (first and second order) and along each trainable angle
//! through the product rule. Measuring `Z` on the result then yields the
//! expectation value together with all derivatives a collocation loss needs.

mod circuit;
mod encode;
mod gate;
mod measure;
mod state;

pub use circuit::Circuit;
pub use encode::{amplitude_encode, power_coefficients};
pub use gate::{apply_gate, AngleSource, GateOp, Mat2};
pub use measure::{expectation_z, expectation_z_with_tangents, ExpectationJet};
pub use state::{StateVector, TangentBundle};
