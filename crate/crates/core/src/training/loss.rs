use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::models::{ModelOutput, QnnModel};
use crate::systems::{DaeSystem, ResidualJacobian};

/// Knobs of the per-window optimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    /// Window length `t_s`, s.
    pub time_span: f64,
    /// Collocation points per window, endpoints included.
    pub num_points: usize,
    /// Weight of the boundary term.
    pub lambda1: f64,
    /// Weight of the residual term.
    pub lambda2: f64,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    /// Independent initializations per window; the lowest loss wins.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            time_span: 0.5,
            num_points: 20,
            lambda1: 1.0,
            lambda2: 1.0,
            max_iterations: 2000,
            gradient_tolerance: 1e-10,
            restarts: 3,
            seed: 7,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_points < 2 {
            return Err(Error::Config(format!(
                "training.num_points must be at least 2, got {}",
                self.num_points
            )));
        }
        if !(self.time_span > 0.0 && self.time_span.is_finite()) {
            return Err(Error::Config(format!(
                "training.time_span must be positive, got {}",
                self.time_span
            )));
        }
        if !(self.lambda1 >= 0.0 && self.lambda2 >= 0.0) {
            return Err(Error::Config(
                "training.lambda1 and training.lambda2 must be non-negative".into(),
            ));
        }
        if self.lambda1 == 0.0 && self.lambda2 == 0.0 {
            return Err(Error::Config(
                "training.lambda1 and training.lambda2 cannot both be zero".into(),
            ));
        }
        if self.restarts == 0 {
            return Err(Error::Config("training.restarts must be at least 1".into()));
        }
        Ok(())
    }
}

/// `n` uniformly spaced points on `[0, window_length]`, both ends included.
pub fn collocation_points(window_length: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::Config(format!("need at least 2 collocation points, got {n}")));
    }
    let last = (n - 1) as f64;
    Ok((0..n)
        .map(|k| {
            if k + 1 == n {
                window_length
            } else {
                window_length * k as f64 / last
            }
        })
        .collect())
}

/// One time interval with its boundary data and models.
///
/// Models take window-local time `x = t − t_start`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingWindow {
    pub t_start: f64,
    pub t_end: f64,
    /// Network regime in force across the window.
    pub regime: usize,
    /// Required value and first derivative of each unknown at `t_start`.
    pub boundary: Vec<Jet>,
    pub collocation: Vec<f64>,
    pub models: Vec<QnnModel>,
}

impl TrainingWindow {
    pub fn length(&self) -> f64 {
        self.t_end - self.t_start
    }

    pub fn num_params(&self) -> usize {
        self.models.iter().map(QnnModel::num_params).sum()
    }

    /// All trainable parameters, model after model.
    pub fn params(&self) -> Vec<f64> {
        self.models.iter().flat_map(QnnModel::params).collect()
    }

    pub fn set_params(&mut self, params: &[f64]) {
        let mut rest = params;
        for m in &mut self.models {
            let (head, tail) = rest.split_at(m.num_params());
            m.set_params(head);
            rest = tail;
        }
    }

    /// Every model evaluated at window-local `x`.
    pub fn evaluate(&self, x: f64) -> Result<Vec<ModelOutput>> {
        self.models.iter().map(|m| m.evaluate(x)).collect()
    }

    /// Value and derivatives of every unknown at window-local `x`.
    pub fn jets(&self, x: f64) -> Result<Vec<Jet>> {
        Ok(self.evaluate(x)?.into_iter().map(|o| o.f).collect())
    }
}

/// Loss terms and the gradient over all trainable parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossBreakdown {
    pub loss_boundary: f64,
    pub loss_points: f64,
    pub total: f64,
    pub gradient: Vec<f64>,
}

/// Boundary mismatch plus squared residuals over the collocation points.
///
/// `total = λ₁·loss_boundary + λ₂·loss_points`, where the boundary term sums
/// `(target − f^{(k)}(0))²` over the value of each unknown and, for
/// second-order unknowns, its first derivative.
pub fn assemble_loss(
    window: &TrainingWindow,
    system: &dyn DaeSystem,
    config: &TrainingConfig,
) -> Result<LossBreakdown> {
    let vars = system.variables();
    if window.models.len() != vars.len() {
        return Err(Error::Dimension {
            expected: vars.len(),
            got: window.models.len(),
        });
    }
    if window.boundary.len() != vars.len() {
        let missing = &vars[window.boundary.len().min(vars.len() - 1)].name;
        return Err(Error::MissingBoundary(missing.clone()));
    }

    let offsets: Vec<usize> = window
        .models
        .iter()
        .scan(0, |acc, m| {
            let o = *acc;
            *acc += m.num_params();
            Some(o)
        })
        .collect();
    let mut gradient = vec![0.0; window.num_params()];
    let sensitivities = |outs: &[ModelOutput]| -> Vec<Vec<Jet>> {
        window
            .models
            .iter()
            .zip(outs)
            .map(|(m, o)| m.trainable_gradient(o))
            .collect()
    };

    // Boundary term at x = 0.
    let outs = window.evaluate(0.0)?;
    let sens = sensitivities(&outs);
    let mut loss_boundary = 0.0;
    for bc in system.boundary_conditions(&window.boundary) {
        let diff = bc.target - outs[bc.var].f.derivative(bc.order);
        loss_boundary += diff * diff;
        let w = -2.0 * config.lambda1 * diff;
        for (p, g) in sens[bc.var].iter().enumerate() {
            gradient[offsets[bc.var] + p] += w * g.derivative(bc.order);
        }
    }

    // Residual term.
    let neq = system.num_equations();
    let mut jac = ResidualJacobian::new(neq, vars.len());
    let mut loss_points = 0.0;
    for &x in &window.collocation {
        let outs = window.evaluate(x)?;
        let y: Vec<Jet> = outs.iter().map(|o| o.f).collect();
        let r = system.residuals(window.regime, window.t_start + x, &y, Some(&mut jac))?;
        let sens = sensitivities(&outs);
        for (j, rj) in r.iter().enumerate() {
            loss_points += rj * rj;
            let w = 2.0 * config.lambda2 * rj;
            for (i, s) in sens.iter().enumerate() {
                let [a, b, c] = jac.get(j, i);
                if a == 0.0 && b == 0.0 && c == 0.0 {
                    continue;
                }
                for (p, g) in s.iter().enumerate() {
                    gradient[offsets[i] + p] += w * (a * g.value + b * g.d1 + c * g.d2);
                }
            }
        }
    }

    Ok(LossBreakdown {
        loss_boundary,
        loss_points,
        total: config.lambda1 * loss_boundary + config.lambda2 * loss_points,
        gradient,
    })
}
