use super::loss::TrainingConfig;
use super::window::{solve_window, ConvergenceRecord, SolvedWindow, WindowFrame};
use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::oracle::Trajectory;
use crate::systems::DaeSystem;

/// Splits `[t0, t1]` into windows of length `time_span`, additionally cut at
/// every breakpoint strictly inside the interval. The last window may be
/// shorter.
pub fn partition_windows(t0: f64, t1: f64, time_span: f64, breakpoints: &[f64]) -> Result<Vec<(f64, f64)>> {
    if !(time_span > 0.0) {
        return Err(Error::Config(format!("time span must be positive, got {time_span}")));
    }
    if !(t1 > t0) {
        return Err(Error::Config(format!("simulation span [{t0}, {t1}] is empty")));
    }
    let eps = 1e-9 * time_span;
    let count = ((t1 - t0) / time_span - 1e-9).ceil().max(1.0) as usize;
    let mut cuts: Vec<f64> = (0..count).map(|k| t0 + k as f64 * time_span).collect();
    cuts.push(t1);
    cuts.extend(breakpoints.iter().copied().filter(|&b| b > t0 + eps && b < t1 - eps));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= eps);
    Ok(cuts.windows(2).map(|w| (w[0], w[1])).collect())
}

/// A stitched solution: one set of trained models per window.
#[derive(Debug, Clone)]
pub struct PiecewiseSolution {
    pub windows: Vec<SolvedWindow>,
}

impl PiecewiseSolution {
    pub fn span(&self) -> (f64, f64) {
        (
            self.windows.first().map_or(0.0, |w| w.t_start),
            self.windows.last().map_or(0.0, |w| w.t_end),
        )
    }

    /// Window responsible for `t`; a seam belongs to the later window.
    pub fn window_at(&self, t: f64) -> Result<&SolvedWindow> {
        let (start, end) = self.span();
        if !(t >= start - 1e-12 && t <= end + 1e-12) {
            return Err(Error::TimeOutOfRange { t, start, end });
        }
        Ok(self
            .windows
            .iter()
            .rev()
            .find(|w| t >= w.t_start)
            .unwrap_or(&self.windows[0]))
    }

    /// First-order state predicted by the trained models at `t`.
    pub fn state_at(&self, system: &dyn DaeSystem, t: f64) -> Result<Vec<f64>> {
        Ok(system.state_from_jets(&self.window_at(t)?.jets(t)?))
    }

    /// Samples the models directly on `times`.
    pub fn sample(&self, system: &dyn DaeSystem, times: &[f64]) -> Result<Trajectory> {
        let mut traj = Trajectory::new(system.state_names());
        for &t in times {
            traj.push(t, &self.state_at(system, t)?);
        }
        Ok(traj)
    }
}

/// Trains windows in sequence over `[0, total_span]`, handing each window's
/// terminal values (and first derivatives) to the next as boundary data.
pub fn solve_trajectory(
    system: &dyn DaeSystem,
    total_span: f64,
    spec: &ModelSpec,
    config: &TrainingConfig,
    observer: &mut dyn FnMut(&ConvergenceRecord),
) -> Result<PiecewiseSolution> {
    solve_trajectory_with(system, total_span, spec, config, observer, &mut |_| {})
}

/// Like [`solve_trajectory`], reporting each window as soon as it finishes.
pub fn solve_trajectory_with(
    system: &dyn DaeSystem,
    total_span: f64,
    spec: &ModelSpec,
    config: &TrainingConfig,
    observer: &mut dyn FnMut(&ConvergenceRecord),
    on_window: &mut dyn FnMut(&SolvedWindow),
) -> Result<PiecewiseSolution> {
    config.validate()?;
    let parts = partition_windows(0.0, total_span, config.time_span, &system.breakpoints())?;
    let mut boundary = system.initial_jets();
    let mut windows = Vec::with_capacity(parts.len());
    for (index, (a, b)) in parts.into_iter().enumerate() {
        let wrap = |e: Error| Error::Window {
            index,
            source: Box::new(e),
        };
        let regime = system.regime_at(0.5 * (a + b)).map_err(wrap)?;
        let frame = WindowFrame {
            index,
            t_start: a,
            t_end: b,
            regime,
            boundary,
        };
        let solved = solve_window(system, &frame, spec, config, observer).map_err(wrap)?;
        on_window(&solved);
        boundary = solved.terminal.clone();
        windows.push(solved);
    }
    Ok(PiecewiseSolution { windows })
}
