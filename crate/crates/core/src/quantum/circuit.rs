use super::gate::{apply_gate, GateOp};
use super::measure::{expectation_z_with_tangents, ExpectationJet};
use super::state::TangentBundle;
use crate::error::{Error, Result};

/// An ordered gate list on a fixed register, measured in `Z` on one qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub num_qubits: usize,
    pub ops: Vec<GateOp>,
    pub measured_qubit: usize,
}

impl Circuit {
    pub fn new(num_qubits: usize, ops: Vec<GateOp>, measured_qubit: usize) -> Result<Self> {
        if let Some(pos) = ops
            .iter()
            .skip(1)
            .position(|op| matches!(op, GateOp::AmplitudePrep { .. }))
        {
            return Err(Error::PrepNotFirst(pos + 1));
        }
        if measured_qubit >= num_qubits {
            return Err(Error::QubitOutOfRange {
                index: measured_qubit,
                num_qubits,
            });
        }
        Ok(Circuit {
            num_qubits,
            ops,
            measured_qubit,
        })
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Runs from `|0…0⟩` with `theta` bound, keeping one tangent per entry.
    pub fn run(&self, theta: &[f64]) -> Result<TangentBundle> {
        self.ops
            .iter()
            .try_fold(TangentBundle::zero_state(self.num_qubits, theta.len()), |b, op| {
                apply_gate(&b, op, theta)
            })
    }

    pub fn expectation(&self, theta: &[f64]) -> Result<ExpectationJet> {
        expectation_z_with_tangents(&self.run(theta)?, self.measured_qubit)
    }
}
