//! Experiment orchestration: seeded trials, parameter sweeps and CSV output.
//!
//! Every trial derives its problem seed from
//! `(master_seed, experiment tag, cell index, trial index)`, so the rows of a
//! sweep do not depend on how many threads run it. Rows come back in
//! canonical order (cell, algorithm, trial).

pub mod cli;
pub mod exec;
pub mod experiments;
pub mod record;

pub use exec::Executor;
pub use experiments::{
    noise_curve, outlier_sweep, phase_grid, poisson_experiment, run_trial, single, Cell,
    ExperimentConfig, ExperimentKind, TrialOptions,
};
pub use record::{IterRow, ResultRow};
