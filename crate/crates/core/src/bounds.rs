//! Oracle variances computed from the ground truth, Cramér–Rao floors, and
//! the Neumann-series representation of a perturbed eigenvector.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::EigenTriple;
use crate::matrix::{dot, norm2, DenseMatrix};
use crate::models::{spectral_norm, GroundTruth, NoiseSpec};
use crate::uncertainty::VarianceKind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleVariance {
    pub v_star: f64,
    pub kind: VarianceKind,
}

fn check_index(truth: &GroundTruth, l: usize) -> Result<()> {
    if l == 0 || l > truth.rank() {
        return Err(Error::RankOutOfRange { r: l, max: truth.rank() });
    }
    Ok(())
}

/// `Σ_ij (x_i y_j + x_j y_i)² σ_ij²` with the noise family applied.
fn weighted_cross_sum(x: &[f64], y: &[f64], noise: &NoiseSpec) -> f64 {
    let n = x.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let c = x[i] * y[j] + x[j] * y[i];
            let s = noise.effective_sigma(i, j);
            total += c * c * s * s;
        }
    }
    total
}

/// `v*_a = (1/(4λ*_l²)) Σ_ij (a⊥_i u*_j + a⊥_j u*_i)² σ_ij²` with `a⊥ = a − (aᵀu*_l)u*_l`.
pub fn oracle_variance_linear(a: &[f64], truth: &GroundTruth, l: usize, noise: &NoiseSpec) -> Result<OracleVariance> {
    check_index(truth, l)?;
    if a.len() != truth.n || noise.n() != truth.n {
        return Err(Error::Shape("direction, truth and noise dimensions differ".into()));
    }
    let u = truth.eigenvector(l);
    let proj = dot(a, &u);
    let a_perp: Vec<f64> = a.iter().zip(&u).map(|(x, y)| x - proj * y).collect();
    let lambda = truth.eigenvalue(l);
    Ok(OracleVariance {
        v_star: weighted_cross_sum(&a_perp, &u, noise) / (4.0 * lambda * lambda),
        kind: VarianceKind::LinearForm,
    })
}

/// `v*_λ = Σ_ij (u*_i u*_j)² σ_ij²`.
pub fn oracle_variance_eigval(truth: &GroundTruth, l: usize, noise: &NoiseSpec) -> Result<OracleVariance> {
    check_index(truth, l)?;
    if noise.n() != truth.n {
        return Err(Error::Shape("truth and noise dimensions differ".into()));
    }
    let u = truth.eigenvector(l);
    Ok(OracleVariance {
        v_star: weighted_cross_sum(&u, &u, noise) / 4.0,
        kind: VarianceKind::Eigenvalue,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceSandwich {
    pub lower: f64,
    pub upper: f64,
    pub v_star: f64,
}

impl VarianceSandwich {
    /// Allows for summation rounding when the sandwich collapses.
    pub fn holds(&self) -> bool {
        let slack = 1e-12 * self.upper.abs().max(f64::MIN_POSITIVE);
        self.lower - slack <= self.v_star && self.v_star <= self.upper + slack
    }
}

/// `½(‖a‖² + (aᵀu*_l)²) σ²/λ*_l²` at `σ_min` and `σ_max`, around the
/// unprojected quantity `(1/(4λ*_l²)) Σ_ij (a_i u*_j + a_j u*_i)² σ_ij²`.
///
/// The sandwich is stated for the raw direction; for `a ⊥ u*_l` the middle
/// value coincides with [`oracle_variance_linear`].
pub fn variance_bounds_check(
    a: &[f64],
    truth: &GroundTruth,
    l: usize,
    noise: &NoiseSpec,
) -> Result<VarianceSandwich> {
    check_index(truth, l)?;
    if a.len() != truth.n || noise.n() != truth.n {
        return Err(Error::Shape("direction, truth and noise dimensions differ".into()));
    }
    let u = truth.eigenvector(l);
    let lambda = truth.eigenvalue(l);
    let v_star = weighted_cross_sum(a, &u, noise) / (4.0 * lambda * lambda);
    let proj = dot(a, &u);
    let base = 0.5 * (dot(a, a) + proj * proj) / (lambda * lambda);
    let (smin, smax) = match noise.family {
        crate::models::NoiseFamily::None => (0.0, 0.0),
        _ => (noise.sigma_min, noise.sigma_max),
    };
    Ok(VarianceSandwich {
        lower: base * smin * smin,
        upper: base * smax * smax,
        v_star,
    })
}

/// `σ_min² ‖a‖² / (2λ*²)`.
pub fn crlb_linear(a: &[f64], lambda_star: f64, sigma_min: f64) -> Result<f64> {
    if lambda_star == 0.0 {
        return Err(Error::ZeroEigenvalue);
    }
    Ok(sigma_min * sigma_min * dot(a, a) / (2.0 * lambda_star * lambda_star))
}

/// `σ_min²`.
pub fn crlb_eigenvalue(sigma_min: f64) -> f64 {
    sigma_min * sigma_min
}

/// `2κ ρ^{s+1} / (1 − ρ)` with `ρ = ‖H‖/|λ_l|`.
pub fn neumann_tail_bound(kappa: f64, ratio: f64, s_max: usize) -> f64 {
    2.0 * kappa * ratio.powi(s_max as i32 + 1) / (1.0 - ratio)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeumannCheck {
    pub defect: f64,
    pub bound: f64,
    /// `‖H‖ / |λ_l|`.
    pub ratio: f64,
}

/// Distance between the computed `u_l` and the series
/// `Σ_j (λ*_j/λ_l)(u*_jᵀu_l) Σ_{s ≤ s_max} H^s u*_j / λ_l^s`.
pub fn neumann_defect(truth: &GroundTruth, h: &DenseMatrix, t: &EigenTriple, s_max: usize) -> Result<NeumannCheck> {
    if h.rows() != truth.n || h.cols() != truth.n || t.u.len() != truth.n {
        return Err(Error::Shape("noise, truth and eigenvector dimensions differ".into()));
    }
    let lambda = t.lambda;
    let h_norm = if h.max_abs() == 0.0 { 0.0 } else { spectral_norm(h)? };
    let ratio = h_norm / lambda.abs();
    if !(ratio < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "Neumann series needs ||H|| < |lambda| (ratio {ratio})"
        )));
    }
    let mut series = vec![0.0; truth.n];
    for j in 1..=truth.rank() {
        let uj = truth.eigenvector(j);
        let coef = truth.eigenvalue(j) / lambda * dot(&uj, &t.u);
        let mut term = uj;
        for s in 0..=s_max {
            if s > 0 {
                term = h.matvec(&term).into_iter().map(|x| x / lambda).collect();
            }
            for (acc, x) in series.iter_mut().zip(&term) {
                *acc += coef * x;
            }
        }
    }
    let diff: Vec<f64> = t.u.iter().zip(&series).map(|(a, b)| a - b).collect();
    Ok(NeumannCheck {
        defect: norm2(&diff),
        bound: neumann_tail_bound(truth.kappa, ratio, s_max),
        ratio,
    })
}
