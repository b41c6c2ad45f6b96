use serde::{Deserialize, Serialize};

use super::{DaeSystem, ResidualJacobian, VariableSpec};
use crate::error::{Error, Result};
use crate::jet::Jet;

/// Single machine against an infinite bus, in the reduced second-order form
/// `δ″ = K₁ − K₂ sin δ − K₃ δ′` with `δ′ = ω − ω_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmibParams {
    /// `ω_s T_m⁰ / 2H`, rad/s².
    pub k1: f64,
    /// `ω_s E V / (2H X)`, rad/s².
    pub k2: f64,
    /// `ω_s D / 2H`, 1/s.
    pub k3: f64,
    /// Initial rotor angle, rad.
    pub delta0: f64,
    /// Initial speed deviation `ω − ω_s`, rad/s.
    pub domega0: f64,
}

impl Default for SmibParams {
    fn default() -> Self {
        SmibParams {
            k1: 5.0,
            k2: 10.0,
            k3: 1.7,
            delta0: -1.0,
            domega0: 7.0,
        }
    }
}

impl SmibParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.k1, self.k2, self.k3, self.delta0, self.domega0];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("SMIB parameters must be finite".into()));
        }
        if self.k2 <= 0.0 {
            return Err(Error::Config(format!("smib.k2 must be positive, got {}", self.k2)));
        }
        Ok(())
    }

    /// Angular acceleration at `(δ, δ′)`.
    pub fn acceleration(&self, delta: f64, ddelta: f64) -> f64 {
        self.k1 - self.k2 * delta.sin() - self.k3 * ddelta
    }

    /// Stable equilibrium angle `arcsin(K₁/K₂)`.
    pub fn equilibrium_angle(&self) -> f64 {
        (self.k1 / self.k2).asin()
    }
}

/// `δ″ − (K₁ − K₂ sin δ − K₃ δ′)`; zero exactly where the swing equation holds.
pub fn smib_residual(params: &SmibParams, _t: f64, delta: f64, ddelta: f64, d2delta: f64) -> f64 {
    d2delta - params.acceleration(delta, ddelta)
}

#[derive(Debug, Clone)]
pub struct SmibSystem {
    pub params: SmibParams,
    variables: Vec<VariableSpec>,
}

impl SmibSystem {
    pub fn new(params: SmibParams) -> Result<Self> {
        params.validate()?;
        Ok(SmibSystem {
            params,
            variables: vec![VariableSpec {
                name: "delta".into(),
                order: 2,
            }],
        })
    }
}

impl Default for SmibSystem {
    fn default() -> Self {
        SmibSystem::new(SmibParams::default()).expect("default parameters are valid")
    }
}

impl DaeSystem for SmibSystem {
    fn name(&self) -> &str {
        "smib"
    }

    fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    fn num_equations(&self) -> usize {
        1
    }

    fn regime_at(&self, _t: f64) -> Result<usize> {
        Ok(0)
    }

    fn residuals(&self, _regime: usize, t: f64, y: &[Jet], jac: Option<&mut ResidualJacobian>) -> Result<Vec<f64>> {
        let d = y[0];
        if let Some(jac) = jac {
            jac.set(0, 0, 0, self.params.k2 * d.value.cos());
            jac.set(0, 0, 1, self.params.k3);
            jac.set(0, 0, 2, 1.0);
        }
        Ok(vec![smib_residual(&self.params, t, d.value, d.d1, d.d2)])
    }

    fn initial_jets(&self) -> Vec<Jet> {
        let p = &self.params;
        vec![Jet::new(p.delta0, p.domega0, p.acceleration(p.delta0, p.domega0))]
    }

    fn state_names(&self) -> Vec<String> {
        vec!["delta".into(), "domega".into()]
    }

    fn initial_state(&self) -> Vec<f64> {
        vec![self.params.delta0, self.params.domega0]
    }

    fn rhs(&self, _regime: usize, _t: f64, s: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = s[1];
        out[1] = self.params.acceleration(s[0], s[1]);
        Ok(())
    }

    fn state_from_jets(&self, y: &[Jet]) -> Vec<f64> {
        vec![y[0].value, y[0].d1]
    }

    fn jets_from_state(&self, _regime: usize, _t: f64, s: &[f64]) -> Result<Vec<Jet>> {
        Ok(vec![Jet::new(s[0], s[1], self.params.acceleration(s[0], s[1]))])
    }
}
