use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::estimate_linear_form;
use crate::exec::map_trials;
use crate::harness::config::{SweepConfig, SweepKind};
use crate::harness::{median, partition, quartiles};
use crate::linalg::{top_r_eigentriples, EigenOptions};
use crate::matrix::dot;
use crate::models::{direction_with_alignment, observe_with, rng_from_seed, trial_seed, ObservationModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub value: f64,
    pub n_trials: usize,
    pub n_failed: usize,
    pub min: f64,
    /// 25th, 50th and 75th percentiles of the error.
    pub quartiles: [f64; 3],
    pub max: f64,
    pub mean: f64,
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub variable: String,
    pub grid: Vec<f64>,
    pub cells: Vec<SweepCell>,
}

impl SweepReport {
    pub fn medians(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.quartiles[1]).collect()
    }
}

/// Error `min|û_{a,2} ± aᵀu*₂|` of the de-biased estimator across a grid.
///
/// Every cell reuses the same trial seeds, so cells differ only through the
/// swept quantity.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    cfg.run.validate()?;
    if cfg.grid.is_empty() {
        return Err(Error::InvalidParameter("sweep grid is empty".into()));
    }
    let increasing = cfg.grid.windows(2).all(|w| w[0] < w[1]);
    let decreasing = cfg.grid.windows(2).all(|w| w[0] > w[1]);
    if !(increasing || decreasing) {
        return Err(Error::InvalidParameter("sweep grid must be strictly monotone".into()));
    }
    if cfg.model.rank() != 2 || cfg.a_targets.len() != 2 {
        return Err(Error::InvalidParameter("sweeps use a rank-2 model and two targets".into()));
    }
    let base = cfg.model.build()?;
    let l = 2;

    let mut cells = Vec::with_capacity(cfg.grid.len());
    for &value in &cfg.grid {
        let (model, targets) = match cfg.kind {
            SweepKind::GroundTruth => (base.clone(), [cfg.a_targets[0], value]),
            SweepKind::Interferer => (base.clone(), [value, cfg.a_targets[1]]),
            SweepKind::EigenGap => {
                let mut m = cfg.model.clone();
                m.eigenvalues = vec![m.eigenvalues[0], m.eigenvalues[0] - value];
                (m.build()?, [cfg.a_targets[0], cfg.a_targets[1]])
            }
        };
        cells.push(run_cell(cfg, &model, value, &targets, l)?);
    }
    Ok(SweepReport {
        variable: match cfg.kind {
            SweepKind::GroundTruth => "a_dot_u2",
            SweepKind::Interferer => "a_dot_u1",
            SweepKind::EigenGap => "eigen_gap",
        }
        .to_string(),
        grid: cfg.grid.clone(),
        cells,
    })
}

fn run_cell(cfg: &SweepConfig, model: &ObservationModel, value: f64, targets: &[f64], l: usize) -> Result<SweepCell> {
    let truth = &model.truth;
    let a = direction_with_alignment(truth, targets, cfg.a_seed)?;
    let target = dot(&a, &truth.eigenvector(l));
    let r = truth.rank();
    let results = map_trials(cfg.run.n_trials, cfg.run.backend(), |trial| {
        let mut rng = rng_from_seed(trial_seed(cfg.run.base_seed, trial as u64));
        let m = observe_with(model, &mut rng);
        let ts = top_r_eigentriples(&m, r, EigenOptions::default())?;
        let est = estimate_linear_form(&a, &ts[l - 1])?.value;
        Ok((est - target).abs().min((est + target).abs()))
    });
    let (errors, failures) = partition(results)?;
    let q = quartiles(&errors);
    debug_assert!((q[1] - median(&errors)).abs() <= f64::EPSILON * q[1].abs().max(1.0) * 4.0);
    Ok(SweepCell {
        value,
        n_trials: errors.len(),
        n_failed: failures.len(),
        min: errors.iter().copied().fold(f64::INFINITY, f64::min),
        quartiles: q,
        max: errors.iter().copied().fold(0.0, f64::max),
        mean: errors.iter().sum::<f64>() / errors.len() as f64,
        errors,
    })
}
