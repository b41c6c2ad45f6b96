//! Benchmark systems written as residual problems `F_j(t, y, y′, y″) = 0`.
//!
//! A [`DaeSystem`] exposes two views of the same dynamics. The residual view
//! is what the collocation loss penalizes: one scalar unknown per model
//! variable, each appearing with derivatives up to its declared order. The
//! first-order view (`rhs`) is what the RK4 reference integrates.

mod smib;
mod wscc;

pub use smib::{smib_residual, SmibParams, SmibSystem};
pub use wscc::{
    phase_schedule, wscc_algebraic, wscc_residuals, MachineParams, NetworkPhase, PhaseLabel, WsccAlgebraic, WsccSystem,
};

use crate::error::Result;
use crate::jet::Jet;

/// One unknown of the residual form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableSpec {
    pub name: String,
    /// Highest derivative that appears in the residuals (1 or 2).
    pub order: usize,
}

/// `∂r_j/∂y_i^{(k)}` for every equation `j`, variable `i` and derivative
/// order `k ∈ {0, 1, 2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualJacobian {
    num_vars: usize,
    data: Vec<[f64; 3]>,
}

impl ResidualJacobian {
    pub fn new(num_equations: usize, num_vars: usize) -> Self {
        ResidualJacobian {
            num_vars,
            data: vec![[0.0; 3]; num_equations * num_vars],
        }
    }

    pub fn get(&self, equation: usize, var: usize) -> [f64; 3] {
        self.data[equation * self.num_vars + var]
    }

    pub fn set(&mut self, equation: usize, var: usize, order: usize, value: f64) {
        self.data[equation * self.num_vars + var][order] = value;
    }

    pub fn clear(&mut self) {
        self.data.fill([0.0; 3]);
    }
}

/// A boundary requirement `y_var^{(order)}(t*) = target`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCondition {
    pub var: usize,
    pub order: usize,
    pub target: f64,
}

pub trait DaeSystem: Send + Sync {
    fn name(&self) -> &str;

    /// Unknowns of the residual form, one model each.
    fn variables(&self) -> &[VariableSpec];

    fn num_equations(&self) -> usize;

    /// Index of the network regime active at `t`. Switch instants belong to
    /// the later regime.
    fn regime_at(&self, t: f64) -> Result<usize>;

    /// Interior instants at which the regime changes.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Evaluates all residuals under `regime`. When `jac` is given it is
    /// overwritten with the partial derivatives.
    fn residuals(&self, regime: usize, t: f64, y: &[Jet], jac: Option<&mut ResidualJacobian>) -> Result<Vec<f64>>;

    /// Value and first derivative of every unknown at `t = 0`.
    fn initial_jets(&self) -> Vec<Jet>;

    /// Names of the first-order state, in output column order.
    fn state_names(&self) -> Vec<String>;

    fn initial_state(&self) -> Vec<f64>;

    /// First-order right-hand side `ds/dt`.
    fn rhs(&self, regime: usize, t: f64, state: &[f64], out: &mut [f64]) -> Result<()>;

    /// Maps unknowns (with derivatives) to the first-order state.
    fn state_from_jets(&self, y: &[Jet]) -> Vec<f64>;

    /// Inverse of [`DaeSystem::state_from_jets`], with derivatives taken from
    /// the right-hand side. Feeding the result to `residuals` gives zero.
    fn jets_from_state(&self, regime: usize, t: f64, state: &[f64]) -> Result<Vec<Jet>>;

    /// Integration step to use inside `regime` given the requested default.
    fn regime_step(&self, _regime: usize, step: f64) -> f64 {
        step
    }

    /// Boundary requirements that pin every unknown given its jets at the
    /// window start: the value, plus the first derivative for second-order
    /// unknowns.
    fn boundary_conditions(&self, start: &[Jet]) -> Vec<BoundaryCondition> {
        self.variables()
            .iter()
            .zip(start)
            .enumerate()
            .flat_map(|(var, (spec, jet))| {
                (0..spec.order).map(move |order| BoundaryCondition {
                    var,
                    order,
                    target: jet.derivative(order),
                })
            })
            .collect()
    }
}
