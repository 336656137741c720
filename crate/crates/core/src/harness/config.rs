//! Serializable experiment descriptions. Every struct rejects unknown keys so
//! a typo in a config file fails before any computation starts.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{
    build_ground_truth, direction_with_alignment, variance_blocks, variance_ladder, Basis, GroundTruth, NoiseFamily,
    NoiseSpec, ObservationKind, ObservationModel,
};

/// How noise levels in a config are to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaUnits {
    #[default]
    Absolute,
    /// Multiples of `1/√(n ln n)`.
    PerSqrtNLogN,
}

impl SigmaUnits {
    pub fn factor(self, n: usize) -> f64 {
        match self {
            SigmaUnits::Absolute => 1.0,
            SigmaUnits::PerSqrtNLogN => {
                let nf = n as f64;
                1.0 / (nf * nf.ln()).sqrt()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NoiseConfig {
    None,
    Homoscedastic {
        sigma: f64,
        #[serde(default)]
        family: NoiseFamily,
        #[serde(default)]
        units: SigmaUnits,
    },
    /// Row-constant ladder from `sigma_first` (row 1) to `sigma_last` (row n).
    Ladder {
        sigma_first: f64,
        sigma_last: f64,
        #[serde(default)]
        family: NoiseFamily,
        #[serde(default)]
        units: SigmaUnits,
    },
    /// Two-block Gaussian variance profile.
    Blocks {
        sigma1: f64,
        sigma2: f64,
        #[serde(default)]
        units: SigmaUnits,
    },
}

impl NoiseConfig {
    pub fn build(&self, n: usize) -> Result<NoiseSpec> {
        match *self {
            NoiseConfig::None => Ok(NoiseSpec::none(n)),
            NoiseConfig::Homoscedastic { sigma, family, units } => {
                NoiseSpec::homoscedastic(n, sigma * units.factor(n), family)
            }
            NoiseConfig::Ladder {
                sigma_first,
                sigma_last,
                family,
                units,
            } => {
                if n < 2 {
                    return Err(Error::InvalidParameter("a ladder needs n >= 2".into()));
                }
                let f = units.factor(n);
                let delta = (sigma_last - sigma_first) / (n as f64 - 1.0);
                Ok(variance_ladder(n, sigma_first * f, delta * f)?.with_family(family))
            }
            NoiseConfig::Blocks { sigma1, sigma2, units } => {
                let f = units.factor(n);
                variance_blocks(n, sigma1 * f, sigma2 * f)
            }
        }
    }
}

fn default_basis() -> Basis {
    Basis::RandomOrthonormal { seed: 0 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub n: usize,
    pub eigenvalues: Vec<f64>,
    #[serde(default = "default_basis")]
    pub basis: Basis,
    pub noise: NoiseConfig,
    #[serde(default = "default_observation")]
    pub observation: ObservationKind,
}

fn default_observation() -> ObservationKind {
    ObservationKind::Full
}

impl ModelConfig {
    pub fn truth(&self) -> Result<GroundTruth> {
        build_ground_truth(self.n, &self.eigenvalues, &self.basis)
    }

    pub fn build(&self) -> Result<ObservationModel> {
        ObservationModel::new(self.observation, self.truth()?, self.noise.build(self.n)?)
    }

    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }
}

fn default_alpha() -> f64 {
    0.05
}

fn default_cb() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InferenceConfig {
    /// 1-based eigen-index.
    pub l: usize,
    /// Required inner products `aᵀu*_k`, one per rank.
    pub a_targets: Vec<f64>,
    /// Seed for the component of `a` orthogonal to the truth.
    #[serde(default)]
    pub a_seed: u64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_cb")]
    pub c_b: f64,
}

impl InferenceConfig {
    pub fn validate(&self, rank: usize) -> Result<()> {
        if self.l == 0 || self.l > rank {
            return Err(Error::RankOutOfRange { r: self.l, max: rank });
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha = {} not in (0, 1)", self.alpha)));
        }
        if !(self.c_b >= 0.0) {
            return Err(Error::InvalidParameter("c_b must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn direction(&self, truth: &GroundTruth) -> Result<Vec<f64>> {
        direction_with_alignment(truth, &self.a_targets, self.a_seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n_trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    /// Forces the sequential backend even when built with `parallel`.
    #[serde(default)]
    pub sequential: bool,
}

impl RunConfig {
    pub fn new(n_trials: usize, base_seed: u64) -> Self {
        RunConfig {
            n_trials,
            base_seed,
            out_dir: None,
            sequential: false,
        }
    }

    pub fn backend(&self) -> crate::exec::Backend {
        if self.sequential {
            crate::exec::Backend::Sequential
        } else {
            crate::exec::Backend::Auto
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::InvalidParameter("n_trials must be positive".into()));
        }
        Ok(())
    }
}

/// Coverage study: the same model observed `n_trials` times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageConfig {
    pub model: ModelConfig,
    pub inference: InferenceConfig,
    pub run: RunConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    /// Varies `aᵀu*₂` with `aᵀu*₁` held fixed.
    GroundTruth,
    /// Varies `aᵀu*₁` with `aᵀu*₂` held fixed.
    Interferer,
    /// Varies `λ*₁ − λ*₂` with both inner products held fixed.
    EigenGap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub kind: SweepKind,
    pub grid: Vec<f64>,
    /// Rank-2 model; for an eigen-gap sweep only `eigenvalues[0]` is used.
    pub model: ModelConfig,
    /// `(aᵀu*₁, aᵀu*₂)`; the swept coordinate is overwritten per cell.
    pub a_targets: Vec<f64>,
    #[serde(default)]
    pub a_seed: u64,
    pub run: RunConfig,
}

/// Symmetrized versus asymmetric eigenvector estimation over a grid of sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymAsymConfig {
    pub n_grid: Vec<usize>,
    pub eigenvalues: Vec<f64>,
    /// Noise applied at every grid size; typically in `per-sqrt-n-log-n` units.
    pub noise: NoiseConfig,
    #[serde(default = "canned_basis")]
    pub basis: Basis,
    /// Eigen-index compared.
    #[serde(default = "second")]
    pub l: usize,
    pub run: RunConfig,
}

fn canned_basis() -> Basis {
    Basis::CannedRank2
}

fn second() -> usize {
    2
}

/// Symmetric homoscedastic Gaussian noise handled by averaging `k` skew-injected copies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymPipeConfig {
    pub n: usize,
    pub eigenvalues: Vec<f64>,
    #[serde(default = "default_basis")]
    pub basis: Basis,
    /// Known noise level of the symmetric noise; also the injected level.
    pub sigma: f64,
    #[serde(default)]
    pub units: SigmaUnits,
    pub k: usize,
    pub inference: InferenceConfig,
    pub run: RunConfig,
}

impl SymPipeConfig {
    pub fn sigma_abs(&self) -> f64 {
        self.sigma * self.units.factor(self.n)
    }
}

/// Neumann-series check on independent draws of the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeumannConfig {
    pub model: ModelConfig,
    pub s_max: Vec<usize>,
    pub run: RunConfig,
}
