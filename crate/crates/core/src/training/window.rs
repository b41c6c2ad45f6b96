use std::cell::RefCell;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::bfgs::{bfgs_minimize, BfgsOptions};
use super::loss::{assemble_loss, collocation_points, LossBreakdown, TrainingConfig, TrainingWindow};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::models::{ModelSpec, QnnModel};
use crate::systems::DaeSystem;

/// Half-width of the uniform range for initial circuit angles.
pub const INITIAL_ANGLE_RANGE: f64 = 0.1;

/// Where and from what state one window starts.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowFrame {
    pub index: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub regime: usize,
    pub boundary: Vec<Jet>,
}

/// One line of the convergence log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRecord {
    pub window: usize,
    pub restart: usize,
    pub iteration: usize,
    pub loss_boundary: f64,
    pub loss_points: f64,
    pub total: f64,
    pub gradient_norm: f64,
}

/// Outcome of one restart.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartSummary {
    pub restart: usize,
    pub total: f64,
    pub iterations: usize,
    pub converged: bool,
    pub line_search_failed: bool,
}

/// A trained window.
#[derive(Debug, Clone)]
pub struct SolvedWindow {
    pub index: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub regime: usize,
    pub models: Vec<QnnModel>,
    /// Loss of the returned parameters.
    pub loss: LossBreakdown,
    pub best_restart: usize,
    pub restarts: Vec<RestartSummary>,
    /// Unknowns (with derivatives) at `t_end`.
    pub terminal: Vec<Jet>,
    pub wall_time: Duration,
}

impl SolvedWindow {
    pub fn jets(&self, t: f64) -> Result<Vec<Jet>> {
        let x = t - self.t_start;
        self.models.iter().map(|m| Ok(m.evaluate(x)?.f)).collect()
    }

    pub fn final_params(&self) -> Vec<f64> {
        self.models.iter().flat_map(QnnModel::params).collect()
    }
}

/// Fresh models for one restart.
///
/// Angles are uniform in `±INITIAL_ANGLE_RANGE`; read-out scales start at 1
/// and offsets are chosen so each model reproduces its boundary value at the
/// window start.
pub fn initialize_models(
    system: &dyn DaeSystem,
    spec: &ModelSpec,
    boundary: &[Jet],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<QnnModel>> {
    system
        .variables()
        .iter()
        .zip(boundary)
        .map(|(_, b)| {
            let theta = (0..spec.num_angles())
                .map(|_| rng.gen_range(-INITIAL_ANGLE_RANGE..=INITIAL_ANGLE_RANGE))
                .collect();
            let mut m = spec.build(theta)?;
            m.anchor(0.0, b.value)?;
            Ok(m)
        })
        .collect()
}

fn restart_rng(seed: u64, window: usize, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((window as u64) << 32) | restart as u64);
    rng
}

/// Trains every unknown's model on one window.
///
/// Each restart draws new initial parameters from a generator seeded by
/// `(config.seed, frame.index, restart)` and runs BFGS on the joint loss; the
/// lowest final loss wins (ties go to the earlier restart).
pub fn solve_window(
    system: &dyn DaeSystem,
    frame: &WindowFrame,
    spec: &ModelSpec,
    config: &TrainingConfig,
    observer: &mut dyn FnMut(&ConvergenceRecord),
) -> Result<SolvedWindow> {
    config.validate()?;
    if frame.boundary.len() != system.variables().len() {
        let name = &system.variables()[frame.boundary.len().min(system.variables().len() - 1)].name;
        return Err(Error::MissingBoundary(name.clone()));
    }
    let started = Instant::now();
    let collocation = collocation_points(frame.t_end - frame.t_start, config.num_points)?;
    let options = BfgsOptions {
        max_iterations: config.max_iterations,
        gradient_tolerance: config.gradient_tolerance,
        ..BfgsOptions::default()
    };

    let mut best: Option<(TrainingWindow, LossBreakdown, usize)> = None;
    let mut summaries = Vec::with_capacity(config.restarts);
    let mut last_error = None;

    for restart in 0..config.restarts {
        let mut rng = restart_rng(config.seed, frame.index, restart);
        let models = initialize_models(system, spec, &frame.boundary, &mut rng)?;
        let mut window = TrainingWindow {
            t_start: frame.t_start,
            t_end: frame.t_end,
            regime: frame.regime,
            boundary: frame.boundary.clone(),
            collocation: collocation.clone(),
            models,
        };
        if let Err(e) = assemble_loss(&window, system, config) {
            if matches!(e, Error::ArcsinDomain { .. }) {
                return Err(e);
            }
            last_error = Some(e);
            continue;
        }

        let probe = RefCell::new(window.clone());
        let last: RefCell<Option<(Vec<f64>, LossBreakdown)>> = RefCell::new(None);
        let objective = |p: &[f64]| {
            let mut w = probe.borrow_mut();
            w.set_params(p);
            match assemble_loss(&w, system, config) {
                Ok(loss) => {
                    let out = (loss.total, loss.gradient.clone());
                    *last.borrow_mut() = Some((p.to_vec(), loss));
                    out
                }
                Err(_) => (f64::NAN, vec![f64::NAN; p.len()]),
            }
        };
        let mut log = |it: &super::bfgs::Iterate<'_>| {
            let cached = last
                .borrow()
                .as_ref()
                .filter(|(p, _)| p.as_slice() == it.x)
                .map(|(_, l)| (l.loss_boundary, l.loss_points));
            let (lb, lp) = cached.unwrap_or_else(|| {
                let mut w = probe.borrow_mut();
                w.set_params(it.x);
                assemble_loss(&w, system, config)
                    .map(|l| (l.loss_boundary, l.loss_points))
                    .unwrap_or((f64::NAN, f64::NAN))
            });
            observer(&ConvergenceRecord {
                window: frame.index,
                restart,
                iteration: it.iteration,
                loss_boundary: lb,
                loss_points: lp,
                total: it.value,
                gradient_norm: it.gradient.iter().fold(0.0, |m, g| m.max(g.abs())),
            });
        };

        let result = match bfgs_minimize(objective, &window.params(), &options, &mut log) {
            Ok(r) => r,
            Err(e) => {
                last_error = Some(e);
                continue;
            }
        };
        window.set_params(&result.x);
        let loss = assemble_loss(&window, system, config)?;
        summaries.push(RestartSummary {
            restart,
            total: loss.total,
            iterations: result.iterations,
            converged: result.converged,
            line_search_failed: result.line_search_failed,
        });
        if loss.total.is_finite() && best.as_ref().is_none_or(|(_, b, _)| loss.total < b.total) {
            best = Some((window, loss, restart));
        }
    }

    let Some((window, loss, best_restart)) = best else {
        return Err(last_error.unwrap_or(Error::NonFinite {
            what: "training loss",
            t: frame.t_start,
        }));
    };
    let terminal = window.jets(window.length())?;
    Ok(SolvedWindow {
        index: frame.index,
        t_start: frame.t_start,
        t_end: frame.t_end,
        regime: frame.regime,
        models: window.models,
        loss,
        best_restart,
        restarts: summaries,
        terminal,
        wall_time: started.elapsed(),
    })
}
