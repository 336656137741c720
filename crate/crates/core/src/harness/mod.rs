//! Seeded Monte Carlo experiments: interval coverage, error sweeps, the
//! symmetrized-versus-asymmetric comparison and the noise-injection pipeline
//! for symmetric noise.
//!
//! Trial `i` draws all of its randomness from `trial_seed(base_seed, i)`, and
//! results are aggregated in trial order, so reports are bit-identical
//! whichever execution backend ran the trials.

pub mod checks;
pub mod config;
pub mod coverage;
pub mod output;
pub mod sweep;
pub mod symasym;
pub mod sympipe;

use serde::{Deserialize, Serialize};
use statrs::statistics::{Data, OrderStatistics};

use crate::error::{Error, Result};
use crate::quantile::normal_cdf;

pub use checks::{run_crlb_check, run_neumann_check, CrlbReport, NeumannReport};
pub use config::{
    CoverageConfig, InferenceConfig, ModelConfig, NeumannConfig, NoiseConfig, RunConfig, SigmaUnits, SweepConfig,
    SweepKind, SymAsymConfig, SymPipeConfig,
};
pub use coverage::{run_coverage, CoverageOutcome};
pub use sweep::{run_sweep, SweepCell, SweepReport};
pub use symasym::{run_sym_vs_asym, SymAsymReport, SymAsymRow};
pub use sympipe::run_symmetric_pipeline;

/// Square roots of variances at or below this are treated as zero.
pub const ZERO_SD: f64 = 1e-10;
/// Largest tolerated fraction of failed trials.
pub const MAX_FAILURE_RATE: f64 = 0.01;

/// One interval from one trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    /// Sign-aligned true value.
    pub target: f64,
    pub estimate: f64,
    pub variance: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub covered: bool,
    #[serde(rename = "std_residual")]
    pub standardized_residual: f64,
}

impl TrialRecord {
    /// Builds the record from an interval centred at `estimate` with
    /// half-width `z √variance`. A numerically zero variance yields an
    /// interval of width `2·ZERO_SD` and a residual of 0.
    pub fn new(trial: usize, target: f64, estimate: f64, variance: f64, z: f64) -> Self {
        let sd = variance.max(0.0).sqrt();
        let (half, residual) = if sd <= ZERO_SD {
            (ZERO_SD, 0.0)
        } else {
            (z * sd, (estimate - target) / sd)
        };
        let (ci_lo, ci_hi) = (estimate - half, estimate + half);
        TrialRecord {
            trial,
            target,
            estimate,
            variance,
            ci_lo,
            ci_hi,
            covered: ci_lo <= target && target <= ci_hi,
            standardized_residual: residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub trial: usize,
    pub error: String,
}

/// Summary of the records for one interval target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub target: String,
    pub n_trials: usize,
    pub n_failed: usize,
    pub coverage_rate: f64,
    pub ks_distance: f64,
    /// 25th, 50th and 75th percentiles of the standardized residuals.
    pub residual_quartiles: [f64; 3],
    pub mean_abs_error: f64,
    pub median_abs_error: f64,
    pub mean_variance: f64,
    /// Sample variance of the point estimates across trials.
    pub estimate_variance: f64,
}

impl CoverageReport {
    pub fn from_records(target: &str, records: &[TrialRecord], n_failed: usize) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::InvalidParameter("no successful trials to summarize".into()));
        }
        let m = records.len() as f64;
        let covered = records.iter().filter(|r| r.covered).count();
        let residuals: Vec<f64> = records.iter().map(|r| r.standardized_residual).collect();
        let abs_err: Vec<f64> = records.iter().map(|r| (r.estimate - r.target).abs()).collect();
        let estimates: Vec<f64> = records.iter().map(|r| r.estimate).collect();
        Ok(CoverageReport {
            target: target.to_string(),
            n_trials: records.len(),
            n_failed,
            coverage_rate: covered as f64 / m,
            ks_distance: ks_statistic(&residuals)?,
            residual_quartiles: quartiles(&residuals),
            mean_abs_error: abs_err.iter().sum::<f64>() / m,
            median_abs_error: median(&abs_err),
            mean_variance: records.iter().map(|r| r.variance).sum::<f64>() / m,
            estimate_variance: sample_variance(&estimates),
        })
    }
}

/// `sup_x |F_m(x) − Φ(x)|` evaluated on both sides of every jump.
pub fn ks_statistic(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("KS statistic of an empty sample".into()));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::NonFinite);
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let m = xs.len() as f64;
    Ok(xs.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = normal_cdf(x);
        d.max((i + 1) as f64 / m - f).max(f - i as f64 / m)
    }))
}

pub fn quartiles(xs: &[f64]) -> [f64; 3] {
    let mut data = Data::new(xs.to_vec());
    [data.quantile(0.25), data.quantile(0.5), data.quantile(0.75)]
}

pub fn median(xs: &[f64]) -> f64 {
    Data::new(xs.to_vec()).median()
}

/// Unbiased sample variance; zero for fewer than two samples.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0)
}

/// Splits per-trial results and enforces the failure-rate budget.
pub(crate) fn partition<T>(results: Vec<Result<T>>) -> Result<(Vec<T>, Vec<TrialFailure>)> {
    let total = results.len();
    let mut ok = Vec::with_capacity(total);
    let mut failed = Vec::new();
    for (trial, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => failed.push(TrialFailure {
                trial,
                error: e.to_string(),
            }),
        }
    }
    if failed.len() as f64 > MAX_FAILURE_RATE * total as f64 {
        return Err(Error::TooManyFailures {
            failed: failed.len(),
            total,
            first: failed[0].error.clone(),
        });
    }
    Ok((ok, failed))
}
