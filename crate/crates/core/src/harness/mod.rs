//! Experiment drivers: long-time energy runs, convergence studies, condition
//! checks and resonance reports, plus the benchmark system and CSV output.

pub mod benchmark;
pub mod config;
pub mod experiments;
pub mod series;

pub use benchmark::{benchmark_initial_state, build_paper_system, build_paper_system_with};
pub use config::ExperimentConfig;
pub use experiments::{
    checks_for, energy_columns, expected_checks, fit_slope, longrun_series, run_checks,
    run_convergence, run_convergence_with, run_longrun, run_resonance, system_from_config,
    ChecksReport, ConvergenceReport, LongrunOutcome, ResonanceReport,
};
pub use series::EnergySeries;
