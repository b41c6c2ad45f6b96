use num_complex::Complex64;

use super::state::{StateVector, TangentBundle};
use crate::error::{Error, Result};
use crate::jet::Jet;

/// Monomials `1, x, …, x^(len−1)` with their first two derivatives.
pub fn power_coefficients(x: f64, len: usize) -> Vec<Jet> {
    (0..len)
        .map(|k| {
            let k_f = k as f64;
            let value = x.powi(k as i32);
            let d1 = if k >= 1 { k_f * x.powi(k as i32 - 1) } else { 0.0 };
            let d2 = if k >= 2 {
                k_f * (k_f - 1.0) * x.powi(k as i32 - 2)
            } else {
                0.0
            };
            Jet::new(value, d1, d2)
        })
        .collect()
}

/// Normalizes `c(x)` and differentiates the quotient `c/‖c‖` twice.
pub(crate) fn normalized_prep(num_qubits: usize, coefficients: &[Jet]) -> Result<TangentBundle> {
    let dim = 1 << num_qubits;
    if coefficients.len() != dim {
        return Err(Error::Dimension {
            expected: dim,
            got: coefficients.len(),
        });
    }
    let s: f64 = coefficients.iter().map(|c| c.value * c.value).sum();
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::NonFinite {
            what: "amplitude preparation norm",
            t: f64::NAN,
        });
    }
    let s1: f64 = coefficients.iter().map(|c| 2.0 * c.value * c.d1).sum();
    let s2: f64 = coefficients.iter().map(|c| 2.0 * (c.d1 * c.d1 + c.value * c.d2)).sum();
    let norm = s.sqrt();
    let n1 = s1 / (2.0 * norm);
    let n2 = s2 / (2.0 * norm) - s1 * s1 / (4.0 * norm * s);

    let re = |v: f64| Complex64::new(v, 0.0);
    let mut value = Vec::with_capacity(dim);
    let mut d_dx = Vec::with_capacity(dim);
    let mut d2_dx2 = Vec::with_capacity(dim);
    for c in coefficients {
        let v = c.value / norm;
        let v1 = (c.d1 - v * n1) / norm;
        let v2 = (c.d2 - 2.0 * v1 * n1 - v * n2) / norm;
        value.push(re(v));
        d_dx.push(re(v1));
        d2_dx2.push(re(v2));
    }
    let mut bundle = TangentBundle::from_state(StateVector::from_amplitudes(num_qubits, value)?, 0);
    bundle.d_dx = d_dx;
    bundle.d2_dx2 = d2_dx2;
    Ok(bundle)
}

/// Loads `[1, x, …, x^(2^n − 1)] / ‖·‖` into an `n`-qubit register.
///
/// The returned bundle has no parameter tangents; widen it with
/// [`TangentBundle::with_num_params`] before applying trainable gates.
pub fn amplitude_encode(x: f64, num_qubits: usize) -> Result<TangentBundle> {
    if !x.is_finite() {
        return Err(Error::NonFinite {
            what: "encoder input",
            t: f64::NAN,
        });
    }
    normalized_prep(num_qubits, &power_coefficients(x, 1 << num_qubits))
}
