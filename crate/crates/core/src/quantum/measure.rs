use num_complex::Complex64;

use super::state::{qubit_mask, StateVector, TangentBundle};
use crate::error::Result;
use crate::jet::Jet;

/// `⟨Z_q⟩ = P(q = 0) − P(q = 1)`.
pub fn expectation_z(state: &StateVector, qubit: usize) -> Result<f64> {
    let mask = qubit_mask(state.num_qubits(), qubit)?;
    Ok(state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, a)| sign(i, mask) * a.norm_sqr())
        .sum())
}

/// `⟨Z_q⟩` with derivatives along the input and every parameter.
///
/// `grad[k]` holds `∂/∂θ_k` of the value, of the first and of the second
/// input derivative, packed into one [`Jet`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationJet {
    pub value: Jet,
    pub grad: Vec<Jet>,
}

impl ExpectationJet {
    pub fn d_dx(&self) -> f64 {
        self.value.d1
    }

    pub fn d2_dx2(&self) -> f64 {
        self.value.d2
    }

    pub fn d_dtheta(&self) -> Vec<f64> {
        self.grad.iter().map(|j| j.value).collect()
    }
}

fn sign(i: usize, mask: usize) -> f64 {
    if i & mask == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `Re Σ_i z_i conj(a_i) b_i`
fn z_inner(mask: usize, a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(i, (a, b))| sign(i, mask) * (a.conj() * b).re)
        .sum()
}

/// Differentiates `⟨ψ|Z_q|ψ⟩` through the propagated tangent states.
pub fn expectation_z_with_tangents(bundle: &TangentBundle, qubit: usize) -> Result<ExpectationJet> {
    let mask = qubit_mask(bundle.num_qubits(), qubit)?;
    let psi = bundle.value.amplitudes();
    let (px, pxx) = (&bundle.d_dx, &bundle.d2_dx2);

    let value = Jet::new(
        z_inner(mask, psi, psi),
        2.0 * z_inner(mask, px, psi),
        2.0 * z_inner(mask, pxx, psi) + 2.0 * z_inner(mask, px, px),
    );
    let grad = (0..bundle.num_params())
        .map(|k| {
            let (pt, ptx, ptxx) = (&bundle.d_dtheta[k], &bundle.d2_dx_dtheta[k], &bundle.d3_dx2_dtheta[k]);
            Jet::new(
                2.0 * z_inner(mask, pt, psi),
                2.0 * (z_inner(mask, ptx, psi) + z_inner(mask, pt, px)),
                2.0 * (z_inner(mask, ptxx, psi) + z_inner(mask, pt, pxx)) + 4.0 * z_inner(mask, ptx, px),
            )
        })
        .collect();
    Ok(ExpectationJet { value, grad })
}
