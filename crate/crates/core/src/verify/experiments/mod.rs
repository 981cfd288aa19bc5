//! Runtime registry of experiment strategies.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::verify::config::ExperimentConfig;
use crate::verify::report::VerificationReport;

mod common;
mod convexity;
mod jump_spectrum;
mod monotone_t;
mod nonreduced;
mod ot_optimal;
mod p_limit;

pub use convexity::Convexity;
pub use jump_spectrum::JumpSpectrumExperiment;
pub use monotone_t::MonotoneT;
pub use nonreduced::Nonreduced;
pub use ot_optimal::OtOptimal;
pub use p_limit::PLimit;

pub trait Experiment: Send + Sync {
    /// Subcommand name.
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn run(&self, cfg: &ExperimentConfig) -> Result<VerificationReport>;
}

#[derive(Default)]
pub struct Registry {
    entries: Vec<Box<dyn Experiment>>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry::default()
    }

    pub fn builtin() -> Self {
        let mut r = Registry::empty();
        r.register(Box::new(OtOptimal));
        r.register(Box::new(MonotoneT));
        r.register(Box::new(PLimit));
        r.register(Box::new(Convexity));
        r.register(Box::new(Nonreduced));
        r.register(Box::new(JumpSpectrumExperiment));
        r
    }

    /// Later registrations replace earlier ones with the same name.
    pub fn register(&mut self, e: Box<dyn Experiment>) {
        self.entries.retain(|x| x.name() != e.name());
        self.entries.push(e);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Experiment> {
        self.entries.iter().find(|e| e.name() == name).map(|b| b.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Experiment> {
        self.entries.iter().map(|b| b.as_ref())
    }

    /// Validates the config, runs the named experiment and stamps timing
    /// and the resolved config onto the report.
    pub fn run(&self, name: &str, cfg: &ExperimentConfig) -> Result<VerificationReport> {
        let exp = self.get(name).ok_or_else(|| {
            Error::Config(format!(
                "unknown experiment {name:?}; known: {}",
                self.names().join(", ")
            ))
        })?;
        if let Some(declared) = &cfg.experiment {
            if declared != name {
                return Err(Error::Config(format!(
                    "config declares experiment {declared:?} but {name:?} was requested"
                )));
            }
        }
        cfg.validate()?;
        let start = Instant::now();
        let mut report = exp.run(cfg)?;
        report.wall_clock_seconds = start.elapsed().as_secs_f64();
        report.experiment = name.to_string();
        report.config = serde_json::to_value(cfg)?;
        Ok(report)
    }
}

pub fn run_ot_optimal(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    Registry::builtin().run("ot-optimal", cfg)
}

pub fn run_monotone_t(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    Registry::builtin().run("monotone-t", cfg)
}

pub fn run_p_limit(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    Registry::builtin().run("p-limit", cfg)
}

pub fn run_convexity(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    Registry::builtin().run("convexity", cfg)
}

pub fn run_nonreduced(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    Registry::builtin().run("nonreduced", cfg)
}

pub fn run_jump_spectrum(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    Registry::builtin().run("jump-spectrum", cfg)
}
