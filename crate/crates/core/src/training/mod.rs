//! Physics-informed training: collocation loss, BFGS, and windowed stitching.

pub mod bfgs;
mod loss;
mod trajectory;
mod window;

pub use bfgs::{bfgs_minimize, BfgsOptions, BfgsResult};
pub use loss::{assemble_loss, collocation_points, LossBreakdown, TrainingConfig, TrainingWindow};
pub use trajectory::{partition_windows, solve_trajectory, solve_trajectory_with, PiecewiseSolution};
pub use window::{
    initialize_models, solve_window, ConvergenceRecord, RestartSummary, SolvedWindow, WindowFrame, INITIAL_ANGLE_RANGE,
};
