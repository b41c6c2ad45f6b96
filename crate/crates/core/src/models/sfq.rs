use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::ModelOutput;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::quantum::{AngleSource, Circuit, GateOp};

/// How the input enters the two-qubit sinusoidal circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Embedding {
    /// `I ⊗ R_y(x)`: rotate qubit 1 by the raw input.
    Ry,
    /// `R_y(arcsin x) ⊗ R_y(2πx)`; defined only for `|x| < 1`.
    Arcsin,
}

/// Layered two-qubit circuit with quadratic post-processing
/// `f = τ₀ + τ₁⟨Z₀⟩ + τ₂⟨Z₀⟩²`.
///
/// `theta` is the 2×L angle matrix stored row-major: `theta[i * L + j]` acts
/// on qubit `i` in layer `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SfqModel {
    pub embedding: Embedding,
    pub num_layers: usize,
    pub theta: Vec<f64>,
    pub tau: [f64; 3],
}

impl SfqModel {
    pub fn new(embedding: Embedding, num_layers: usize, theta: Vec<f64>, tau: [f64; 3]) -> Result<Self> {
        if num_layers == 0 {
            return Err(Error::Config("SFQ needs at least one layer".into()));
        }
        if theta.len() != 2 * num_layers {
            return Err(Error::Dimension {
                expected: 2 * num_layers,
                got: theta.len(),
            });
        }
        Ok(SfqModel {
            embedding,
            num_layers,
            theta,
            tau,
        })
    }

    pub fn angle(&self, qubit: usize, layer: usize) -> f64 {
        self.theta[qubit * self.num_layers + layer]
    }

    fn embedding_ops(&self, x: f64) -> Result<Vec<GateOp>> {
        match self.embedding {
            Embedding::Ry => Ok(vec![GateOp::RotY {
                target: 1,
                angle: AngleSource::Input(Jet::variable(x)),
            }]),
            Embedding::Arcsin => {
                if !(x.abs() < 1.0) {
                    return Err(Error::ArcsinDomain { x });
                }
                let r = 1.0 - x * x;
                let asin = Jet::new(x.asin(), 1.0 / r.sqrt(), x / (r * r.sqrt()));
                Ok(vec![
                    GateOp::RotY {
                        target: 0,
                        angle: AngleSource::Input(asin),
                    },
                    GateOp::RotY {
                        target: 1,
                        angle: AngleSource::Input(Jet::new(2.0 * PI * x, 2.0 * PI, 0.0)),
                    },
                ])
            }
        }
    }

    /// Embedding, then per layer `H(q0) · R_y(θ0j)(q0) · R_y(θ1j)(q1) · CNOT(q0→q1)`,
    /// then a closing `H(q0)`. The model reads `Z` on qubit 0.
    pub fn build_circuit(&self, x: f64) -> Result<Circuit> {
        let l = self.num_layers;
        let mut ops = self.embedding_ops(x)?;
        for j in 0..l {
            ops.push(GateOp::Hadamard { target: 0 });
            ops.push(GateOp::RotY {
                target: 0,
                angle: AngleSource::Param(j),
            });
            ops.push(GateOp::RotY {
                target: 1,
                angle: AngleSource::Param(l + j),
            });
            ops.push(GateOp::ControlledNot { control: 0, target: 1 });
        }
        ops.push(GateOp::Hadamard { target: 0 });
        Circuit::new(2, ops, 0)
    }

    pub fn evaluate(&self, x: f64) -> Result<ModelOutput> {
        let e = self.build_circuit(x)?.expectation(&self.theta)?;
        let z = e.value;
        let [t0, t1, t2] = self.tau;
        let g1 = t1 + 2.0 * t2 * z.value;
        let g2 = 2.0 * t2;

        let f = Jet::new(
            t0 + t1 * z.value + t2 * z.value * z.value,
            g1 * z.d1,
            g1 * z.d2 + g2 * z.d1 * z.d1,
        );
        let grad_quantum = e
            .grad
            .iter()
            .map(|zt| {
                Jet::new(
                    g1 * zt.value,
                    g2 * zt.value * z.d1 + g1 * zt.d1,
                    g2 * zt.value * z.d2 + g1 * zt.d2 + 2.0 * g2 * z.d1 * zt.d1,
                )
            })
            .collect();
        let grad_classical = vec![Jet::constant(1.0), z, z * z];
        Ok(ModelOutput {
            f,
            grad_quantum,
            grad_classical,
        })
    }
}
