//! Trains the sinusoidal circuit on the first two seconds of the
//! single-machine swing and compares it with the RK4 reference.
//!
//! cargo run --release -p qdae --example smib

use qdae::models::{ModelKind, ModelSpec};
use qdae::oracle::{mse, rk4_sample, uniform_grid};
use qdae::systems::{DaeSystem, SmibSystem};
use qdae::training::{solve_trajectory, TrainingConfig};

fn main() -> qdae::Result<()> {
    let system = SmibSystem::default();
    let spec = ModelSpec::of_kind(ModelKind::SfqRy);
    let config = TrainingConfig {
        time_span: 0.5,
        num_points: 20,
        lambda1: 1000.0,
        ..TrainingConfig::default()
    };
    let solution = solve_trajectory(&system, 2.0, &spec, &config, &mut |_| {})?;
    for w in &solution.windows {
        println!(
            "window {} [{:.1}, {:.1}] s  loss {:.3e}",
            w.index, w.t_start, w.t_end, w.loss.total
        );
    }

    let grid = uniform_grid(0.0, 2.0, 0.01);
    let qnn = solution.sample(&system, &grid)?;
    let reference = rk4_sample(&system, 0.0, &system.initial_state(), &grid, 1e-4)?;
    for name in system.state_names() {
        println!("MSE {name:>6}: {:.3e}", mse(&qnn, &reference, &name)?);
    }
    Ok(())
}
