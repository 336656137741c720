use rand::Rng;

use crate::error::{Error, Result};
use crate::exec::map_trials;
use crate::harness::config::SymPipeConfig;
use crate::harness::coverage::CoverageOutcome;
use crate::harness::{partition, CoverageReport, TrialRecord};
use crate::linalg::EigenOptions;
use crate::matrix::{dot, DenseMatrix};
use crate::models::{build_ground_truth, rng_from_seed, skew_symmetric_noise, symmetric_gaussian_noise, trial_seed};
use crate::quantile::two_sided_z;
use crate::uncertainty::{Decomposition, VarianceEstimate};

/// Averaged estimates over `k` skew-injected copies of one symmetric observation.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineEstimate {
    pub linear: f64,
    pub eigenvalue: f64,
    /// Variance estimates of the first copy, used for both intervals.
    pub linear_variance: VarianceEstimate,
    pub eigen_variance: VarianceEstimate,
}

/// Runs the interval procedures on `M + H⁽ᵏ⁾` for `k` independent
/// skew-symmetric Gaussian `H⁽ᵏ⁾` of level `sigma`, with `u⁽ᵏ⁾` flipped so
/// that consecutive copies have nonnegative inner product and the first copy
/// has nonnegative inner product with `reference`.
#[allow(clippy::too_many_arguments)]
pub fn averaged_copies<R: Rng + ?Sized>(
    m: &DenseMatrix,
    r: usize,
    l: usize,
    a: &[f64],
    sigma: f64,
    k: usize,
    alpha: f64,
    c_b: f64,
    reference: &[f64],
    rng: &mut R,
) -> Result<PipelineEstimate> {
    if k == 0 {
        return Err(Error::InvalidParameter("need at least one copy".into()));
    }
    let mut prev: Vec<f64> = reference.to_vec();
    let (mut lin_sum, mut eig_sum) = (0.0, 0.0);
    let mut first: Option<(VarianceEstimate, VarianceEstimate)> = None;
    for _ in 0..k {
        let copy = m.add(&skew_symmetric_noise(m.rows(), sigma, rng));
        let mut dec = Decomposition::new(&copy, r, EigenOptions::default())?;
        dec.triples[l - 1].align_to(&prev);
        let t = dec.triples[l - 1].clone();
        let (est, ci) = dec.linear_form_interval(a, l, alpha, c_b)?;
        let (lambda, eci) = dec.eigenvalue_interval(l, alpha)?;
        lin_sum += est.signed(a, &t);
        eig_sum += lambda;
        first.get_or_insert((ci.variance, eci.variance));
        prev = t.u;
    }
    let (linear_variance, eigen_variance) = first.expect("k >= 1");
    Ok(PipelineEstimate {
        linear: lin_sum / k as f64,
        eigenvalue: eig_sum / k as f64,
        linear_variance,
        eigen_variance,
    })
}

/// Coverage of the averaged pipeline under symmetric homoscedastic Gaussian noise.
pub fn run_symmetric_pipeline(cfg: &SymPipeConfig) -> Result<CoverageOutcome> {
    cfg.run.validate()?;
    let r = cfg.eigenvalues.len();
    cfg.inference.validate(r)?;
    if cfg.k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let sigma = cfg.sigma_abs();
    if !(sigma >= 0.0) {
        return Err(Error::InvalidParameter("sigma must be nonnegative".into()));
    }
    let truth = build_ground_truth(cfg.n, &cfg.eigenvalues, &cfg.basis)?;
    let m_star = truth.matrix();
    let l = cfg.inference.l;
    let a = cfg.inference.direction(&truth)?;
    let u_star = truth.eigenvector(l);
    let lin_target = dot(&a, &u_star);
    let eig_target = truth.eigenvalue(l);
    let z = two_sided_z(cfg.inference.alpha);

    let results = map_trials(cfg.run.n_trials, cfg.run.backend(), |trial| {
        let mut rng = rng_from_seed(trial_seed(cfg.run.base_seed, trial as u64));
        let m = m_star.add(&symmetric_gaussian_noise(cfg.n, sigma, &mut rng));
        let est = averaged_copies(
            &m,
            r,
            l,
            &a,
            sigma,
            cfg.k,
            cfg.inference.alpha,
            cfg.inference.c_b,
            &u_star,
            &mut rng,
        )?;
        Ok((
            TrialRecord::new(trial, lin_target, est.linear, est.linear_variance.value, z),
            TrialRecord::new(trial, eig_target, est.eigenvalue, est.eigen_variance.value, z),
        ))
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
