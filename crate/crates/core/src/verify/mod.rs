//! Experiment drivers: configuration, strategies and reports.

pub mod config;
pub mod experiments;
pub mod extrapolate;
pub mod report;

pub use config::ExperimentConfig;
pub use experiments::{
    run_convexity, run_jump_spectrum, run_monotone_t, run_nonreduced, run_ot_optimal, run_p_limit, Experiment, Registry,
};
pub use report::{OutputFormat, VerificationReport};
