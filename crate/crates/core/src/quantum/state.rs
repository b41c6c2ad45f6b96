use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense amplitudes of an `n`-qubit register.
///
/// Basis index `i` is read big-endian: qubit 0 is the most significant bit, so
/// for two qubits the amplitudes are ordered `|00⟩, |01⟩, |10⟩, |11⟩` with the
/// left label belonging to qubit 0.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(num_qubits: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        StateVector { num_qubits, amplitudes }
    }

    /// Wraps raw amplitudes; the length must be `2^num_qubits`. No normalization
    /// is applied.
    pub fn from_amplitudes(num_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != 1 << num_qubits {
            return Err(Error::Dimension {
                expected: 1 << num_qubits,
                got: amplitudes.len(),
            });
        }
        Ok(StateVector { num_qubits, amplitudes })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability of reading `1` on `qubit`.
    pub fn prob_one(&self, qubit: usize) -> Result<f64> {
        let mask = qubit_mask(self.num_qubits, qubit)?;
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }
}

/// Bit mask selecting `qubit` inside a basis index.
pub(crate) fn qubit_mask(num_qubits: usize, qubit: usize) -> Result<usize> {
    if qubit >= num_qubits {
        return Err(Error::QubitOutOfRange {
            index: qubit,
            num_qubits,
        });
    }
    Ok(1 << (num_qubits - 1 - qubit))
}

/// A state plus its forward-mode tangents.
///
/// Besides `∂ψ/∂x`, `∂²ψ/∂x²` and one `∂ψ/∂θ_k` per bound parameter, the
/// bundle carries the mixed tangents `∂²ψ/∂x∂θ_k` and `∂³ψ/∂x²∂θ_k`. Those are
/// what the collocation loss needs to differentiate `f′` and `f″` with respect
/// to the circuit parameters. No `θ`–`θ` second-order terms are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentBundle {
    pub value: StateVector,
    pub d_dx: Vec<Complex64>,
    pub d2_dx2: Vec<Complex64>,
    pub d_dtheta: Vec<Vec<Complex64>>,
    pub d2_dx_dtheta: Vec<Vec<Complex64>>,
    pub d3_dx2_dtheta: Vec<Vec<Complex64>>,
}

impl TangentBundle {
    /// `|0…0⟩` with all tangents zero, ready for `num_params` parameters.
    pub fn zero_state(num_qubits: usize, num_params: usize) -> Self {
        Self::from_state(StateVector::zero(num_qubits), num_params)
    }

    /// Wraps a fixed state (independent of `x` and `θ`).
    pub fn from_state(value: StateVector, num_params: usize) -> Self {
        let zeros = vec![Complex64::new(0.0, 0.0); value.dim()];
        TangentBundle {
            d_dx: zeros.clone(),
            d2_dx2: zeros.clone(),
            d_dtheta: vec![zeros.clone(); num_params],
            d2_dx_dtheta: vec![zeros.clone(); num_params],
            d3_dx2_dtheta: vec![zeros; num_params],
            value,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.value.num_qubits()
    }

    pub fn num_params(&self) -> usize {
        self.d_dtheta.len()
    }

    /// Resizes the parameter tangents, zero-filling new slots.
    pub fn with_num_params(mut self, num_params: usize) -> Self {
        let zeros = vec![Complex64::new(0.0, 0.0); self.value.dim()];
        self.d_dtheta.resize(num_params, zeros.clone());
        self.d2_dx_dtheta.resize(num_params, zeros.clone());
        self.d3_dx2_dtheta.resize(num_params, zeros);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_state_is_normalized() {
        for n in 1..=3 {
            let s = StateVector::zero(n);
            assert_eq!(s.dim(), 1 << n);
            assert_eq!(s.norm_sqr(), 1.0);
            assert_eq!(s.prob_one(0).unwrap(), 0.0);
        }
    }

    #[test]
    fn rejects_wrong_length() {
        let err = StateVector::from_amplitudes(2, vec![Complex64::new(1.0, 0.0); 3]).unwrap_err();
        assert_eq!(err, Error::Dimension { expected: 4, got: 3 });
    }

    #[test]
    fn qubit_zero_is_most_significant() {
        assert_eq!(qubit_mask(3, 0).unwrap(), 0b100);
        assert_eq!(qubit_mask(3, 2).unwrap(), 0b001);
        assert!(qubit_mask(3, 3).is_err());
    }
}
