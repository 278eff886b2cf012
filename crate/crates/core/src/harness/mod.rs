//! Experiment drivers behind the command-line tool.

pub mod config;
pub mod studies;
pub mod suite;

pub use config::{initial_state, presets, ExperimentConfig};
pub use studies::{
    bounds_table, convergence_table, convergence_table_with, cubature_error_study,
    empirical_threshold, error_norm, halving_ladder, loglog_slope, BoundsRow, ConvergenceRow,
    CubatureErrorRow, Norm, Threshold,
};
