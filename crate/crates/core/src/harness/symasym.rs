use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::estimate_eigvec;
use crate::exec::map_trials;
use crate::harness::config::SymAsymConfig;
use crate::harness::partition;
use crate::linalg::{top_r_eigentriples, EigenOptions};
use crate::matrix::sign_blind_distance;
use crate::models::{build_ground_truth, observe_with, rng_from_seed, trial_seed, ObservationKind, ObservationModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymAsymRow {
    pub n: usize,
    pub n_trials: usize,
    pub n_failed: usize,
    /// Mean of `min‖û_l ± u*_l‖` with `û_l = (u_l + w_l)/‖u_l + w_l‖`.
    pub asym_error: f64,
    /// Mean of the same distance for the l-th eigenvector of `½(M + Mᵀ)`.
    pub sym_error: f64,
    /// Mean of `dist(û_l, u*_l) / dist(û_l, u*_{k})` with `k` the other index.
    pub asym_relative: f64,
    pub sym_relative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymAsymReport {
    pub l: usize,
    pub rows: Vec<SymAsymRow>,
}

pub fn run_sym_vs_asym(cfg: &SymAsymConfig) -> Result<SymAsymReport> {
    cfg.run.validate()?;
    if cfg.n_grid.is_empty() {
        return Err(Error::InvalidParameter("n grid is empty".into()));
    }
    let r = cfg.eigenvalues.len();
    if cfg.l == 0 || cfg.l > r || r < 2 {
        return Err(Error::RankOutOfRange { r: cfg.l, max: r });
    }
    let mut rows = Vec::with_capacity(cfg.n_grid.len());
    for (gi, &n) in cfg.n_grid.iter().enumerate() {
        let truth = build_ground_truth(n, &cfg.eigenvalues, &cfg.basis)?;
        let noise = cfg.noise.build(n)?;
        let model = ObservationModel::new(ObservationKind::Full, truth, noise)?;
        let u_star = model.truth.eigenvector(cfg.l);
        let other = model.truth.eigenvector(if cfg.l == 1 { 2 } else { 1 });
        let base_seed = cfg.run.base_seed.wrapping_add((gi as u64) << 40);

        let results = map_trials(cfg.run.n_trials, cfg.run.backend(), |trial| {
            let mut rng = rng_from_seed(trial_seed(base_seed, trial as u64));
            let m = observe_with(&model, &mut rng);
            let asym = top_r_eigentriples(&m, r, EigenOptions::default())?;
            let u_asym = estimate_eigvec(&asym[cfg.l - 1])?;
            let sym_m = m.add(&m.transpose()).scale(0.5);
            let sym = top_r_eigentriples(&sym_m, r, EigenOptions::default())?;
            let u_sym = &sym[cfg.l - 1].u;
            let da = sign_blind_distance(&u_asym, &u_star);
            let ds = sign_blind_distance(u_sym, &u_star);
            Ok([
                da,
                ds,
                da / sign_blind_distance(&u_asym, &other),
                ds / sign_blind_distance(u_sym, &other),
            ])
        });
        let (ok, failures) = partition(results)?;
        let count = ok.len() as f64;
        let mean = |k: usize| ok.iter().map(|v| v[k]).sum::<f64>() / count;
        rows.push(SymAsymRow {
            n,
            n_trials: ok.len(),
            n_failed: failures.len(),
            asym_error: mean(0),
            sym_error: mean(1),
            asym_relative: mean(2),
            sym_relative: mean(3),
        });
    }
    Ok(SymAsymReport { l: cfg.l, rows })
}
