//! Circuit families used as trainable surrogates `f(x)`.
//!
//! Both families end in a classical post-processing polynomial of the measured
//! expectation `⟨Z₀⟩`. [`ModelOutput`] reports `f`, `f′`, `f″` and, for every
//! parameter, the derivative of each of those three quantities.

mod pfq;
mod sfq;

use serde::{Deserialize, Serialize};

pub use pfq::{PfqModel, RotationAxis};
pub use sfq::{Embedding, SfqModel};

use crate::error::Result;
use crate::jet::Jet;
use crate::quantum::Circuit;

/// Surrogate value with input derivatives and parameter sensitivities.
///
/// `grad_quantum[k]` packs `(∂f/∂θ_k, ∂f′/∂θ_k, ∂f″/∂θ_k)`; `grad_classical`
/// does the same for the post-processing coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelOutput {
    pub f: Jet,
    pub grad_quantum: Vec<Jet>,
    pub grad_classical: Vec<Jet>,
}

impl ModelOutput {
    pub fn value(&self) -> f64 {
        self.f.value
    }

    pub fn df_dx(&self) -> f64 {
        self.f.d1
    }

    pub fn d2f_dx2(&self) -> f64 {
        self.f.d2
    }
}

/// Which circuit family a model uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    SfqRy,
    SfqArcsin,
    Pfq,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::SfqRy => "sfq-ry",
            ModelKind::SfqArcsin => "sfq-arcsin",
            ModelKind::Pfq => "pfq",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sfq-ry" => Some(ModelKind::SfqRy),
            "sfq-arcsin" => Some(ModelKind::SfqArcsin),
            "pfq" => Some(ModelKind::Pfq),
            _ => None,
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Either circuit family.
#[derive(Debug, Clone, PartialEq)]
pub enum QnnModel {
    Sfq(SfqModel),
    Pfq(PfqModel),
}

impl QnnModel {
    pub fn build_circuit(&self, x: f64) -> Result<Circuit> {
        match self {
            QnnModel::Sfq(m) => m.build_circuit(x),
            QnnModel::Pfq(m) => m.build_circuit(x),
        }
    }

    pub fn evaluate(&self, x: f64) -> Result<ModelOutput> {
        match self {
            QnnModel::Sfq(m) => m.evaluate(x),
            QnnModel::Pfq(m) => m.evaluate(x),
        }
    }

    fn trainable_classical(&self) -> Vec<bool> {
        match self {
            QnnModel::Sfq(_) => vec![true; 3],
            QnnModel::Pfq(m) => vec![m.train_scale, true],
        }
    }

    fn split(&self) -> (&[f64], &[f64]) {
        match self {
            QnnModel::Sfq(m) => (m.theta.as_slice(), m.tau.as_slice()),
            QnnModel::Pfq(m) => (m.theta.as_slice(), m.tau.as_slice()),
        }
    }

    fn split_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        match self {
            QnnModel::Sfq(m) => (m.theta.as_mut_slice(), m.tau.as_mut_slice()),
            QnnModel::Pfq(m) => (m.theta.as_mut_slice(), m.tau.as_mut_slice()),
        }
    }

    /// Number of entries in [`QnnModel::params`].
    pub fn num_params(&self) -> usize {
        let (theta, _) = self.split();
        theta.len() + self.trainable_classical().iter().filter(|t| **t).count()
    }

    /// Trainable parameters: all angles, then the unfrozen classical
    /// coefficients.
    pub fn params(&self) -> Vec<f64> {
        let mask = self.trainable_classical();
        let (theta, tau) = self.split();
        theta
            .iter()
            .copied()
            .chain(tau.iter().zip(&mask).filter(|(_, m)| **m).map(|(t, _)| *t))
            .collect()
    }

    pub fn set_params(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.num_params(), "parameter count");
        let mask = self.trainable_classical();
        let (theta, tau) = self.split_mut();
        let (q, c) = params.split_at(theta.len());
        theta.copy_from_slice(q);
        let mut c = c.iter();
        for (t, m) in tau.iter_mut().zip(mask) {
            if m {
                *t = *c.next().expect("length checked");
            }
        }
    }

    /// Output sensitivities in the order of [`QnnModel::params`].
    pub fn trainable_gradient(&self, out: &ModelOutput) -> Vec<Jet> {
        let mask = self.trainable_classical();
        out.grad_quantum
            .iter()
            .copied()
            .chain(out.grad_classical.iter().zip(mask).filter(|(_, m)| *m).map(|(g, _)| *g))
            .collect()
    }
}

/// Hyperparameters that select and shape a circuit family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// Ansatz layers for the sinusoidal family.
    pub layers: usize,
    /// Register size for the polynomial family.
    pub qubits: usize,
    /// Rotation sequence for the polynomial family.
    pub rotations: Vec<RotationAxis>,
    /// Train the polynomial read-out scale `τ₃` (otherwise frozen at 1).
    pub train_scale: bool,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            kind: ModelKind::SfqRy,
            layers: 2,
            qubits: 1,
            rotations: PfqModel::default_rotations(),
            train_scale: true,
        }
    }
}

impl ModelSpec {
    pub fn of_kind(kind: ModelKind) -> Self {
        ModelSpec {
            kind,
            ..ModelSpec::default()
        }
    }

    /// A model with the given angles, unit read-out scale and zero offset.
    pub fn build(&self, theta: Vec<f64>) -> Result<QnnModel> {
        Ok(match self.kind {
            ModelKind::SfqRy | ModelKind::SfqArcsin => {
                let embedding = if self.kind == ModelKind::SfqRy {
                    Embedding::Ry
                } else {
                    Embedding::Arcsin
                };
                QnnModel::Sfq(SfqModel::new(embedding, self.layers, theta, [0.0, 1.0, 0.0])?)
            }
            ModelKind::Pfq => {
                let mut m = PfqModel::new(self.qubits, self.rotations.clone(), theta, [1.0, 0.0])?;
                m.train_scale = self.train_scale;
                QnnModel::Pfq(m)
            }
        })
    }

    pub fn num_angles(&self) -> usize {
        match self.kind {
            ModelKind::SfqRy | ModelKind::SfqArcsin => 2 * self.layers,
            ModelKind::Pfq => self.rotations.len(),
        }
    }
}

impl QnnModel {
    /// Shifts the read-out offset so that `f(x) = target`.
    pub fn anchor(&mut self, x: f64, target: f64) -> Result<()> {
        let shift = target - self.evaluate(x)?.value();
        match self {
            QnnModel::Sfq(m) => m.tau[0] += shift,
            QnnModel::Pfq(m) => m.tau[1] += shift,
        }
        Ok(())
    }
}
