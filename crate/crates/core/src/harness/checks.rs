//! Runs that compare Monte Carlo behaviour against closed-form bounds.

use serde::{Deserialize, Serialize};

use crate::bounds::{crlb_linear, neumann_defect, oracle_variance_linear};
use crate::error::{Error, Result};
use crate::exec::map_trials;
use crate::harness::config::{CoverageConfig, NeumannConfig};
use crate::harness::coverage::{run_coverage, CoverageOutcome};
use crate::harness::partition;
use crate::linalg::{top_r_eigentriples, EigenOptions};
use crate::models::{rng_from_seed, sample_noise_with, trial_seed};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrlbReport {
    /// Sample variance of the linear-form estimates across trials.
    pub empirical_variance: f64,
    pub crlb: f64,
    pub oracle_variance: f64,
    /// `empirical_variance / crlb`.
    pub ratio: f64,
    pub coverage: CoverageOutcome,
}

/// Empirical variance of the linear-form estimator against `σ_min²‖a‖²/(2λ*²)`.
pub fn run_crlb_check(cfg: &CoverageConfig) -> Result<CrlbReport> {
    let model = cfg.model.build()?;
    let truth = &model.truth;
    let l = cfg.inference.l;
    cfg.inference.validate(truth.rank())?;
    let a = cfg.inference.direction(truth)?;
    let crlb = crlb_linear(&a, truth.eigenvalue(l), model.noise.sigma_min)?;
    if !(crlb > 0.0) {
        return Err(Error::InvalidParameter("the bound is zero; the noise must be nonzero".into()));
    }
    let oracle = oracle_variance_linear(&a, truth, l, &model.noise)?.v_star;
    let coverage = run_coverage(cfg)?;
    let empirical = coverage.linear.estimate_variance;
    Ok(CrlbReport {
        empirical_variance: empirical,
        crlb,
        oracle_variance: oracle,
        ratio: empirical / crlb,
        coverage,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeumannRow {
    pub trial: usize,
    pub l: usize,
    pub s_max: usize,
    pub defect: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeumannReport {
    pub rows: Vec<NeumannRow>,
    pub n_failed: usize,
    /// Rows whose defect exceeds the tail bound.
    pub violations: usize,
}

/// Distance between each computed `u_l` and its truncated Neumann series.
pub fn run_neumann_check(cfg: &NeumannConfig) -> Result<NeumannReport> {
    cfg.run.validate()?;
    if cfg.s_max.is_empty() {
        return Err(Error::InvalidParameter("no truncation orders given".into()));
    }
    if !matches!(cfg.model.observation, crate::models::ObservationKind::Full) {
        return Err(Error::InvalidParameter("the series check needs a full observation".into()));
    }
    let model = cfg.model.build()?;
    let truth = &model.truth;
    let m_star = truth.matrix();
    let results = map_trials(cfg.run.n_trials, cfg.run.backend(), |trial| {
        let mut rng = rng_from_seed(trial_seed(cfg.run.base_seed, trial as u64));
        let h = sample_noise_with(&model.noise, &mut rng);
        let ts = top_r_eigentriples(&m_star.add(&h), truth.rank(), EigenOptions::default())?;
        let mut rows = Vec::new();
        for t in &ts {
            for &s in &cfg.s_max {
                let c = neumann_defect(truth, &h, t, s)?;
                rows.push(NeumannRow {
                    trial,
                    l: t.index,
                    s_max: s,
                    defect: c.defect,
                    bound: c.bound,
                    ratio: c.ratio,
                });
            }
        }
        Ok(rows)
    });
    let (ok, failures) = partition(results)?;
    let rows: Vec<NeumannRow> = ok.into_iter().flatten().collect();
    let violations = rows.iter().filter(|r| r.defect > r.bound).count();
    Ok(NeumannReport {
        rows,
        n_failed: failures.len(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{ModelConfig, NoiseConfig, RunConfig};
    use crate::models::{Basis, NoiseFamily, ObservationKind};

    #[test]
    fn neumann_rows_respect_bound() {
        let cfg = NeumannConfig {
            model: ModelConfig {
                n: 30,
                eigenvalues: vec![1.0, 0.6],
                basis: Basis::RandomOrthonormal { seed: 1 },
                noise: NoiseConfig::Homoscedastic {
                    sigma: 0.01,
                    family: NoiseFamily::Gaussian,
                    units: Default::default(),
                },
                observation: ObservationKind::Full,
            },
            s_max: vec![0, 2, 8],
            run: RunConfig::new(4, 5),
        };
        let rep = run_neumann_check(&cfg).unwrap();
        assert_eq!(rep.rows.len(), 4 * 2 * 3);
        assert_eq!(rep.violations, 0);
    }
}
