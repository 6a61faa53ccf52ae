//! Experiment harness: configuration, node and rule files, convergence
//! sweeps with rate fits, and CSV reports.

pub mod config;
pub mod experiment;
pub mod io;

pub use config::{parse_degrees, ExperimentConfig, FunctionSpec, GeneratorSpec};
pub use experiment::{
    run_approx_experiment, run_frame, run_quad_experiment, run_weyl_experiment, ConvergenceReport,
    ConvergenceRow, Mode, RateFits, WeylReport, WeylRow,
};
pub use io::{read_layers, read_rules, write_layers, write_rules, StoredRule};
