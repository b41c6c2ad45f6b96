//! Batch driver behind the `qdae` binary: configuration loading and the
//! `solve`, `oracle`, `compare` and `sweep` commands.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod error;
pub mod run;

pub use config::{AnsatzOptions, RunConfig, SystemKind, OUTPUT_DIR_ENV};
pub use error::{CliError, Result};
pub use run::{
    cmd_compare, cmd_oracle, cmd_solve, cmd_solve_with, cmd_sweep, mse_table, oracle_trajectory, output_grid, MseTable,
    SolveOutcome, SweepAxis, SweepRow,
};
