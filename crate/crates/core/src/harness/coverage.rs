use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exec::map_trials;
use crate::harness::config::CoverageConfig;
use crate::harness::{partition, CoverageReport, TrialFailure, TrialRecord};
use crate::linalg::EigenOptions;
use crate::matrix::dot;
use crate::models::{observe_with, rng_from_seed, trial_seed};
use crate::quantile::two_sided_z;
use crate::uncertainty::Decomposition;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageOutcome {
    pub linear: CoverageReport,
    pub eigenvalue: CoverageReport,
    pub linear_records: Vec<TrialRecord>,
    pub eigen_records: Vec<TrialRecord>,
    pub failures: Vec<TrialFailure>,
    /// Fraction of successful trials with `|λ_l − λ*_l| < Δ*_l / 2`.
    pub eigenvalue_localized: f64,
}

/// Intervals for `aᵀu*_l` and `λ*_l` on `n_trials` independent observations.
///
/// The computed `u_l` is flipped so that `u_lᵀu*_l ≥ 0`, which makes the
/// target `aᵀu*_l` itself. Magnitude-type estimates carry the sign of
/// `aᵀ(u_l + w_l)` after that flip.
pub fn run_coverage(cfg: &CoverageConfig) -> Result<CoverageOutcome> {
    cfg.run.validate()?;
    cfg.inference.validate(cfg.model.rank())?;
    let model = cfg.model.build()?;
    let truth = &model.truth;
    let l = cfg.inference.l;
    let a = cfg.inference.direction(truth)?;
    let u_star = truth.eigenvector(l);
    let lin_target = dot(&a, &u_star);
    let eig_target = truth.eigenvalue(l);
    let z = two_sided_z(cfg.inference.alpha);
    let r = truth.rank();
    let n = truth.n;

    let results = map_trials(cfg.run.n_trials, cfg.run.backend(), |trial| {
        let mut rng = rng_from_seed(trial_seed(cfg.run.base_seed, trial as u64));
        let m = observe_with(&model, &mut rng);
        let mut dec = Decomposition::new(&m, r, EigenOptions::default())?;
        dec.triples[l - 1].align_to(&u_star);
        let t = &dec.triples[l - 1];

        let (est, ci) = dec.linear_form_interval(&a, l, cfg.inference.alpha, cfg.inference.c_b)?;
        let point = est.signed(&a, t);
        let lin = TrialRecord::new(trial, lin_target, point, ci.variance.value, z);

        let (lambda, eci) = dec.eigenvalue_interval(l, cfg.inference.alpha)?;
        let eig = TrialRecord::new(trial, eig_target, lambda, eci.variance.value, z);
        debug_assert_eq!(m.rows(), n);
        Ok((lin, eig))
    });

    let (ok, failures) = partition(results)?;
    let (linear_records, eigen_records): (Vec<_>, Vec<_>) = ok.into_iter().unzip();
    let half_gap = truth.gap(l) / 2.0;
    let localized = eigen_records
        .iter()
        .filter(|r| (r.estimate - r.target).abs() < half_gap)
        .count() as f64
        / eigen_records.len().max(1) as f64;
    Ok(CoverageOutcome {
        linear: CoverageReport::from_records("linear-form", &linear_records, failures.len())?,
        eigenvalue: CoverageReport::from_records("eigenvalue", &eigen_records, failures.len())?,
        linear_records,
        eigen_records,
        failures,
        eigenvalue_localized: localized,
    })
}
