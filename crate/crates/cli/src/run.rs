use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use qdae::oracle::{format_value, mse, rk4_sample, uniform_grid, Trajectory};
use qdae::systems::DaeSystem;
use qdae::training::{solve_trajectory_with, ConvergenceRecord, PiecewiseSolution, SolvedWindow};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut out = create(path)?;
    traj.write_csv(&mut out).map_err(|e| CliError::io(path, e))?;
    out.flush().map_err(|e| CliError::io(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).map_err(|e| CliError::io(path, std::io::Error::other(e)))
}

fn csv_io(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::io(path, std::io::Error::other(e))
}

/// The sampling grid shared by `trajectory.csv` and `oracle.csv`.
pub fn output_grid(config: &RunConfig) -> Vec<f64> {
    uniform_grid(0.0, config.span(), config.output_step)
}

/// Per-variable MSE in column order, then the average.
#[derive(Debug, Clone, PartialEq)]
pub struct MseTable {
    pub rows: Vec<(String, f64)>,
    pub average: f64,
}

impl MseTable {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.rows.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv_writer(path)?;
        let io = csv_io(path);
        w.write_record(["variable", "mse"]).map_err(&io)?;
        for (name, v) in &self.rows {
            w.write_record([name.as_str(), &format_value(*v)]).map_err(&io)?;
        }
        w.write_record(["Average", &format_value(self.average)]).map_err(&io)?;
        w.flush().map_err(|e| CliError::io(path, e))
    }
}

/// Compares two trajectories variable by variable. Both must carry the same
/// variables (in any order) on the same grid.
pub fn mse_table(qnn: &Trajectory, reference: &Trajectory) -> Result<MseTable> {
    let missing = |a: &Trajectory, b: &Trajectory| -> Vec<String> {
        b.names.iter().filter(|n| !a.names.contains(n)).cloned().collect()
    };
    let (in_qnn, in_ref) = (missing(qnn, reference), missing(reference, qnn));
    if !in_qnn.is_empty() || !in_ref.is_empty() {
        let mut parts = Vec::new();
        if !in_qnn.is_empty() {
            parts.push(format!("missing from QNN trajectory: {}", in_qnn.join(", ")));
        }
        if !in_ref.is_empty() {
            parts.push(format!("missing from reference: {}", in_ref.join(", ")));
        }
        return Err(CliError::Schema(parts.join("; ")));
    }
    let rows = reference
        .names
        .iter()
        .map(|n| Ok((n.clone(), mse(qnn, reference, n)?)))
        .collect::<Result<Vec<_>>>()?;
    let average = rows.iter().map(|(_, v)| v).sum::<f64>() / rows.len().max(1) as f64;
    Ok(MseTable { rows, average })
}

/// Fixed-step RK4 reference on the output grid.
pub fn oracle_trajectory(config: &RunConfig, system: &dyn DaeSystem) -> Result<Trajectory> {
    Ok(rk4_sample(
        system,
        0.0,
        &system.initial_state(),
        &output_grid(config),
        config.oracle_step,
    )?)
}

/// `qdae oracle`: writes `oracle.csv` and `config_resolved.toml`.
pub fn cmd_oracle(config: &RunConfig) -> Result<Trajectory> {
    let system = config.build_system()?;
    prepare_dir(&config.output_dir)?;
    write_text(&config.output_dir.join("config_resolved.toml"), &config.resolved_toml())?;
    let traj = oracle_trajectory(config, system.as_ref())?;
    write_trajectory(&config.output_dir.join("oracle.csv"), &traj)?;
    Ok(traj)
}

#[derive(Serialize)]
struct WindowTiming {
    window: usize,
    wall_time_s: f64,
}

#[derive(Serialize)]
struct RunTiming {
    total_s: f64,
    windows: Vec<WindowTiming>,
}

fn summary_row(w: &SolvedWindow) -> Vec<String> {
    let best = w.restarts.iter().find(|r| r.restart == w.best_restart);
    vec![
        w.index.to_string(),
        format_value(w.t_start),
        format_value(w.t_end),
        w.regime.to_string(),
        w.best_restart.to_string(),
        best.map_or(0, |r| r.iterations).to_string(),
        best.is_some_and(|r| r.converged).to_string(),
        format_value(w.loss.loss_boundary),
        format_value(w.loss.loss_points),
        format_value(w.loss.total),
    ]
}

/// Result of `qdae solve`.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub solution: PiecewiseSolution,
    pub trajectory: Trajectory,
    /// Filled when `emit_plots` is set.
    pub mse: Option<MseTable>,
}

/// `qdae solve`: trains every window and writes `trajectory.csv`,
/// `convergence.jsonl`, `summary.csv`, `timing.json` and
/// `config_resolved.toml`.
///
/// The CSV and JSONL files depend only on the configuration; wall-clock
/// times go to `timing.json` so that reruns stay byte-identical.
pub fn cmd_solve(config: &RunConfig) -> Result<SolveOutcome> {
    cmd_solve_with(config, &mut |_| {})
}

/// Like [`cmd_solve`], reporting each finished window to `progress`.
pub fn cmd_solve_with(config: &RunConfig, progress: &mut dyn FnMut(&SolvedWindow)) -> Result<SolveOutcome> {
    let system = config.build_system()?;
    let dir = &config.output_dir;
    prepare_dir(dir)?;
    write_text(&dir.join("config_resolved.toml"), &config.resolved_toml())?;

    let started = Instant::now();
    let log_path = dir.join("convergence.jsonl");
    let mut log = create(&log_path)?;
    let summary_path = dir.join("summary.csv");
    let mut summary = csv_writer(&summary_path)?;
    summary
        .write_record([
            "window",
            "t_start",
            "t_end",
            "regime",
            "best_restart",
            "iterations",
            "converged",
            "loss_boundary",
            "loss_points",
            "total",
        ])
        .map_err(csv_io(&summary_path))?;

    let mut log_error: Option<CliError> = None;
    let mut summary_error: Option<CliError> = None;
    let mut timings = Vec::new();
    let result = solve_trajectory_with(
        system.as_ref(),
        config.span(),
        &config.model_spec(),
        &config.training,
        &mut |rec: &ConvergenceRecord| {
            if log_error.is_none() {
                if let Err(e) = serde_json::to_writer(&mut log, rec)
                    .map_err(std::io::Error::other)
                    .and_then(|_| log.write_all(b"\n"))
                {
                    log_error = Some(CliError::io(&log_path, e));
                }
            }
        },
        &mut |w: &SolvedWindow| {
            timings.push(WindowTiming {
                window: w.index,
                wall_time_s: w.wall_time.as_secs_f64(),
            });
            if let Err(e) = summary.write_record(summary_row(w)).and_then(|_| Ok(summary.flush()?)) {
                summary_error.get_or_insert(csv_io(&summary_path)(e));
            }
            progress(w);
        },
    );
    log.flush().map_err(|e| CliError::io(&log_path, e))?;
    summary.flush().map_err(|e| CliError::io(&summary_path, e))?;
    let timing = RunTiming {
        total_s: started.elapsed().as_secs_f64(),
        windows: timings,
    };
    write_text(
        &dir.join("timing.json"),
        &serde_json::to_string_pretty(&timing).expect("timing serializes"),
    )?;
    if let Some(e) = log_error.or(summary_error) {
        return Err(e);
    }
    let solution = result?;

    let grid = output_grid(config);
    let trajectory = solution.sample(system.as_ref(), &grid)?;
    write_trajectory(&dir.join("trajectory.csv"), &trajectory)?;

    let mse = if config.emit_plots {
        let reference = oracle_trajectory(config, system.as_ref())?;
        write_trajectory(&dir.join("oracle.csv"), &reference)?;
        let table = mse_table(&trajectory, &reference)?;
        table.write(&dir.join("mse.csv"))?;
        write_plot_data(&dir.join("plots"), &trajectory, &reference)?;
        Some(table)
    } else {
        None
    };
    Ok(SolveOutcome {
        solution,
        trajectory,
        mse,
    })
}

/// One `t,qnn,reference` file per variable.
fn write_plot_data(dir: &Path, qnn: &Trajectory, reference: &Trajectory) -> Result<()> {
    prepare_dir(dir)?;
    for name in &reference.names {
        let path = dir.join(format!("{name}.csv"));
        let mut w = csv_writer(&path)?;
        let io = csv_io(&path);
        w.write_record(["t", "qnn", "reference"]).map_err(&io)?;
        let (a, b) = (qnn.column(name)?, reference.column(name)?);
        for k in 0..reference.len() {
            w.write_record([format_value(reference.times[k]), format_value(a[k]), format_value(b[k])])
                .map_err(&io)?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
    }
    Ok(())
}

fn read_trajectory(path: &Path) -> Result<Trajectory> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    Trajectory::read_csv(file).map_err(|e| CliError::Schema(format!("{}: {}", path.display(), e)))
}

/// `qdae compare`: per-variable MSE of two CSV trajectories, written to `out`.
pub fn cmd_compare(qnn: &Path, reference: &Path, out: &Path) -> Result<MseTable> {
    let table = mse_table(&read_trajectory(qnn)?, &read_trajectory(reference)?)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        prepare_dir(parent)?;
    }
    table.write(out)?;
    Ok(table)
}

/// Training setting varied by `qdae sweep`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    TimeSpan,
    NumPoints,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::TimeSpan => "time_span",
            SweepAxis::NumPoints => "num_points",
        }
    }
}

impl FromStr for SweepAxis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "time_span" => Ok(SweepAxis::TimeSpan),
            "num_points" => Ok(SweepAxis::NumPoints),
            other => Err(CliError::Config(format!(
                "unknown sweep axis `{other}` (expected time_span or num_points)"
            ))),
        }
    }
}

/// One line of `sweep.csv`.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub dir: PathBuf,
    pub outcome: std::result::Result<MseTable, String>,
    /// Exit status the value would have produced on its own.
    pub status: i32,
}

fn sweep_config(base: &RunConfig, axis: SweepAxis, value: f64) -> Result<RunConfig> {
    let mut config = base.clone();
    match axis {
        SweepAxis::TimeSpan => config.training.time_span = value,
        SweepAxis::NumPoints => {
            if value.fract() != 0.0 || value < 0.0 {
                return Err(CliError::Config(format!(
                    "num_points must be a whole number, got {value}"
                )));
            }
            config.training.num_points = value as usize;
        }
    }
    config
        .training
        .validate()
        .map_err(|e| CliError::Config(format!("config error: `training`: {}", e.root())))?;
    config.output_dir = base.output_dir.join(format!("{}_{value}", axis.name()));
    Ok(config)
}

fn sweep_one(config: &RunConfig) -> Result<MseTable> {
    let mut config = config.clone();
    config.emit_plots = true;
    let outcome = cmd_solve(&config)?;
    Ok(outcome.mse.expect("emit_plots set"))
}

/// `qdae sweep`: one full solve per value, each in its own subdirectory of
/// `output_dir`, summarized in `sweep.csv`. A failing value is recorded and
/// the sweep goes on.
pub fn cmd_sweep(base: &RunConfig, axis: SweepAxis, values: &[f64]) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(CliError::Config("sweep needs at least one value".into()));
    }
    let configs = values
        .iter()
        .map(|&v| sweep_config(base, axis, v))
        .collect::<Result<Vec<_>>>()?;
    prepare_dir(&base.output_dir)?;
    write_text(&base.output_dir.join("config_resolved.toml"), &base.resolved_toml())?;

    let rows: Vec<SweepRow> = configs
        .par_iter()
        .zip(values)
        .map(|(config, &value)| {
            let result = sweep_one(config);
            SweepRow {
                value,
                dir: config.output_dir.clone(),
                status: result.as_ref().map_or_else(CliError::exit_code, |_| 0),
                outcome: result.map_err(|e| e.to_string()),
            }
        })
        .collect();

    let names = base.build_system()?.state_names();
    let path = base.output_dir.join("sweep.csv");
    let mut w = csv_writer(&path)?;
    let io = csv_io(&path);
    let header: Vec<String> = [axis.name().to_string(), "status".into()]
        .into_iter()
        .chain(names.iter().cloned())
        .chain(["average".to_string(), "error".to_string()])
        .collect();
    w.write_record(&header).map_err(&io)?;
    for row in &rows {
        let mut rec = vec![format_value(row.value), row.status.to_string()];
        match &row.outcome {
            Ok(table) => {
                rec.extend(names.iter().map(|n| table.get(n).map(format_value).unwrap_or_default()));
                rec.push(format_value(table.average));
                rec.push(String::new());
            }
            Err(msg) => {
                rec.extend(names.iter().map(|_| String::new()));
                rec.push(String::new());
                rec.push(msg.clone());
            }
        }
        w.write_record(&rec).map_err(&io)?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    Ok(rows)
}
