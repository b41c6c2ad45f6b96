use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qdae_cli::{cmd_compare, cmd_oracle, cmd_solve_with, cmd_sweep, CliError, RunConfig, SweepAxis};

/// Physics-informed quantum circuit solver for power-system transients.
#[derive(Parser)]
#[command(name = "qdae", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the circuits window by window and write the QNN trajectory.
    Solve { config: PathBuf },
    /// Integrate the reference solution with fixed-step RK4.
    Oracle { config: PathBuf },
    /// Per-variable MSE between a QNN trajectory and a reference.
    Compare {
        qnn: PathBuf,
        reference: PathBuf,
        /// Output file; defaults to mse.csv next to the QNN trajectory.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Repeat `solve` over several values of one training setting.
    Sweep {
        config: PathBuf,
        /// time_span or num_points
        #[arg(long)]
        axis: String,
        /// Comma-separated values, e.g. 1,0.5,0.2
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<f64>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve { config } => {
            let config = RunConfig::load(&config)?;
            let outcome = cmd_solve_with(&config, &mut |w| {
                eprintln!(
                    "window {:>3} [{:.4}, {:.4}] s  loss {:.3e}  ({:.2} s)",
                    w.index,
                    w.t_start,
                    w.t_end,
                    w.loss.total,
                    w.wall_time.as_secs_f64()
                )
            })?;
            eprintln!(
                "wrote {} samples to {}",
                outcome.trajectory.len(),
                config.output_dir.join("trajectory.csv").display()
            );
            if let Some(table) = outcome.mse {
                eprintln!("average MSE {:.3e}", table.average);
            }
        }
        Command::Oracle { config } => {
            let config = RunConfig::load(&config)?;
            let traj = cmd_oracle(&config)?;
            eprintln!(
                "wrote {} samples to {}",
                traj.len(),
                config.output_dir.join("oracle.csv").display()
            );
        }
        Command::Compare { qnn, reference, out } => {
            let out = out.unwrap_or_else(|| qnn.with_file_name("mse.csv"));
            let table = cmd_compare(&qnn, &reference, &out)?;
            for (name, v) in &table.rows {
                println!("{name:>10}  {v:.6e}");
            }
            println!("{:>10}  {:.6e}", "Average", table.average);
        }
        Command::Sweep { config, axis, values } => {
            let axis: SweepAxis = axis.parse()?;
            let config = RunConfig::load(&config)?;
            for row in cmd_sweep(&config, axis, &values)? {
                match &row.outcome {
                    Ok(t) => println!("{} = {}: average MSE {:.6e}", axis.name(), row.value, t.average),
                    Err(e) => println!("{} = {}: failed ({e})", axis.name(), row.value),
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
