use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use eigengap::harness::{
    CoverageConfig, NeumannConfig, RunConfig, SweepConfig, SymAsymConfig, SymPipeConfig,
};
use eigengap::{Error, Result};

/// A full experiment description. The `command` key selects the variant and
/// the remaining keys are that experiment's configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    Coverage(CoverageConfig),
    Sweep(SweepConfig),
    Symasym(SymAsymConfig),
    Sympipe(SymPipeConfig),
    CrlbCheck(CoverageConfig),
    NeumannCheck(NeumannConfig),
}

/// Flag values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentConfig::Coverage(_) => "coverage",
            ExperimentConfig::Sweep(_) => "sweep",
            ExperimentConfig::Symasym(_) => "symasym",
            ExperimentConfig::Sympipe(_) => "sympipe",
            ExperimentConfig::CrlbCheck(_) => "crlb-check",
            ExperimentConfig::NeumannCheck(_) => "neumann-check",
        }
    }

    pub fn run(&self) -> &RunConfig {
        match self {
            ExperimentConfig::Coverage(c) | ExperimentConfig::CrlbCheck(c) => &c.run,
            ExperimentConfig::Sweep(c) => &c.run,
            ExperimentConfig::Symasym(c) => &c.run,
            ExperimentConfig::Sympipe(c) => &c.run,
            ExperimentConfig::NeumannCheck(c) => &c.run,
        }
    }

    fn run_mut(&mut self) -> &mut RunConfig {
        match self {
            ExperimentConfig::Coverage(c) | ExperimentConfig::CrlbCheck(c) => &mut c.run,
            ExperimentConfig::Sweep(c) => &mut c.run,
            ExperimentConfig::Symasym(c) => &mut c.run,
            ExperimentConfig::Sympipe(c) => &mut c.run,
            ExperimentConfig::NeumannCheck(c) => &mut c.run,
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        let run = self.run_mut();
        if let Some(seed) = o.seed {
            run.base_seed = seed;
        }
        if let Some(trials) = o.trials {
            run.n_trials = trials;
        }
        if let Some(out) = &o.out {
            run.out_dir = Some(out.clone());
        }
    }

    /// Where results go: the configured directory, or `./out`.
    pub fn out_dir(&self) -> PathBuf {
        self.run().out_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    /// Checks that need no computation, so bad configs fail before any trial runs.
    pub fn validate(&self) -> Result<()> {
        self.run().validate()?;
        match self {
            ExperimentConfig::Coverage(c) | ExperimentConfig::CrlbCheck(c) => {
                c.model.build()?;
                c.inference.validate(c.model.rank())
            }
            ExperimentConfig::Sweep(c) => c.model.build().map(|_| ()),
            ExperimentConfig::Symasym(c) => {
                if c.n_grid.is_empty() {
                    return Err(Error::InvalidParameter("n_grid is empty".into()));
                }
                Ok(())
            }
            ExperimentConfig::Sympipe(c) => c.inference.validate(c.eigenvalues.len()),
            ExperimentConfig::NeumannCheck(c) => c.model.build().map(|_| ()),
        }
    }
}
