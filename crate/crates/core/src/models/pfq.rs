use serde::{Deserialize, Serialize};

use super::ModelOutput;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::quantum::{power_coefficients, AngleSource, Circuit, GateOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RotationAxis {
    #[serde(rename = "ry")]
    Y,
    #[serde(rename = "rz")]
    Z,
}

/// Amplitude-encoded polynomial circuit with affine read-out
/// `f = τ₃⟨Z₀⟩ + τ₄` (stored as `tau = [τ₃, τ₄]`).
///
/// The register starts in `[1, x, …, x^(2^n−1)]/‖·‖`, then each rotation in
/// `rotations` acts on qubit 0 with its own angle.
#[derive(Debug, Clone, PartialEq)]
pub struct PfqModel {
    pub num_qubits: usize,
    pub rotations: Vec<RotationAxis>,
    pub theta: Vec<f64>,
    pub tau: [f64; 2],
    /// When false, `τ₃` is held at its current value during training.
    pub train_scale: bool,
}

impl PfqModel {
    /// `R_y, R_z, R_y` on one qubit.
    pub fn default_rotations() -> Vec<RotationAxis> {
        vec![RotationAxis::Y, RotationAxis::Z, RotationAxis::Y]
    }

    pub fn new(num_qubits: usize, rotations: Vec<RotationAxis>, theta: Vec<f64>, tau: [f64; 2]) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::Config("PFQ needs at least one qubit".into()));
        }
        if theta.len() != rotations.len() {
            return Err(Error::Dimension {
                expected: rotations.len(),
                got: theta.len(),
            });
        }
        Ok(PfqModel {
            num_qubits,
            rotations,
            theta,
            tau,
            train_scale: true,
        })
    }

    pub fn build_circuit(&self, x: f64) -> Result<Circuit> {
        if !x.is_finite() {
            return Err(Error::NonFinite {
                what: "model input",
                t: x,
            });
        }
        let mut ops = vec![GateOp::AmplitudePrep {
            coefficients: power_coefficients(x, 1 << self.num_qubits),
        }];
        ops.extend(self.rotations.iter().enumerate().map(|(k, axis)| {
            let angle = AngleSource::Param(k);
            match axis {
                RotationAxis::Y => GateOp::RotY { target: 0, angle },
                RotationAxis::Z => GateOp::RotZ { target: 0, angle },
            }
        }));
        Circuit::new(self.num_qubits, ops, 0)
    }

    pub fn evaluate(&self, x: f64) -> Result<ModelOutput> {
        let e = self.build_circuit(x)?.expectation(&self.theta)?;
        let [scale, offset] = self.tau;
        Ok(ModelOutput {
            f: e.value.scale(scale) + Jet::constant(offset),
            grad_quantum: e.grad.iter().map(|g| g.scale(scale)).collect(),
            grad_classical: vec![e.value, Jet::constant(1.0)],
        })
    }
}
