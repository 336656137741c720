//! Plug-in variance estimates and confidence intervals for linear forms of
//! eigenvectors and for eigenvalues.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    estimate_eigval, estimate_eigvec, estimate_linear_form_modified, residual_noise_matrix, LinearFormEstimate,
    ResidualNoise,
};
use crate::linalg::{top_r_eigentriples, EigenOptions, EigenTriple};
use crate::matrix::{dot, DenseMatrix};
use crate::quantile::two_sided_z;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceKind {
    LinearForm,
    Eigenvalue,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub value: f64,
    pub kind: VarianceKind,
    pub lambda_used: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub point: f64,
    pub variance: VarianceEstimate,
    pub alpha: f64,
    pub lo: f64,
    pub hi: f64,
}

impl IntervalEstimate {
    /// Symmetric interval `point ± Φ⁻¹(1 − α/2) √v`.
    pub fn new(point: f64, variance: VarianceEstimate, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} not in (0, 1)")));
        }
        if !point.is_finite() || !variance.value.is_finite() || variance.value < 0.0 {
            return Err(Error::NonFinite);
        }
        let half = two_sided_z(alpha) * variance.value.sqrt();
        Ok(IntervalEstimate {
            point,
            variance,
            alpha,
            lo: point - half,
            hi: point + half,
        })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// The same interval re-centred at `point`.
    pub fn recentred(&self, point: f64) -> Self {
        let half = 0.5 * self.width();
        IntervalEstimate {
            point,
            lo: point - half,
            hi: point + half,
            ..*self
        }
    }
}

/// `v = (1/(4λ²)) Σ_ij (a_i u_j + a_j u_i)² Ĥ_ij²`.
pub fn estimate_variance_quadratic(a: &[f64], u: &[f64], lambda: f64, h_hat: &DenseMatrix) -> Result<f64> {
    let n = a.len();
    if u.len() != n || h_hat.rows() != n || h_hat.cols() != n {
        return Err(Error::Shape(format!(
            "vectors of length {} and {} against a {}x{} matrix",
            n,
            u.len(),
            h_hat.rows(),
            h_hat.cols()
        )));
    }
    if lambda == 0.0 {
        return Err(Error::ZeroEigenvalue);
    }
    let mut total = 0.0;
    for i in 0..n {
        let (ai, ui) = (a[i], u[i]);
        let row = h_hat.row(i);
        let mut acc = 0.0;
        for j in 0..n {
            let c = ai * u[j] + a[j] * ui;
            let h = row[j];
            acc += c * c * h * h;
        }
        total += acc;
    }
    Ok(total / (4.0 * lambda * lambda))
}

/// `v̂_a` with `â⊥ = a − (aᵀû)û` and `û` from [`estimate_eigvec`].
pub fn variance_linear_form(a: &[f64], t: &EigenTriple, res: &ResidualNoise) -> Result<VarianceEstimate> {
    let u = estimate_eigvec(t)?;
    let proj = dot(a, &u);
    let a_perp: Vec<f64> = a.iter().zip(&u).map(|(x, y)| x - proj * y).collect();
    Ok(VarianceEstimate {
        value: estimate_variance_quadratic(&a_perp, &u, t.lambda, &res.h_hat)?,
        kind: VarianceKind::LinearForm,
        lambda_used: t.lambda,
    })
}

/// `v̂_λ = Σ_ij (û_i û_j)² Ĥ_ij²`.
pub fn variance_eigenvalue(t: &EigenTriple, res: &ResidualNoise) -> Result<VarianceEstimate> {
    let u = estimate_eigvec(t)?;
    Ok(VarianceEstimate {
        value: estimate_variance_quadratic(&u, &u, 1.0, &res.h_hat)?,
        kind: VarianceKind::Eigenvalue,
        lambda_used: 1.0,
    })
}

/// Shared decomposition for running both interval procedures on one matrix.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub triples: Vec<EigenTriple>,
    pub residual: ResidualNoise,
}

impl Decomposition {
    pub fn new(m: &DenseMatrix, r: usize, opts: EigenOptions) -> Result<Self> {
        Ok(Decomposition {
            triples: top_r_eigentriples(m, r, opts)?,
            residual: residual_noise_matrix(m, r)?,
        })
    }

    pub fn n(&self) -> usize {
        self.residual.h_hat.rows()
    }

    pub fn triple(&self, l: usize) -> Result<&EigenTriple> {
        if l == 0 || l > self.triples.len() {
            return Err(Error::RankOutOfRange {
                r: l,
                max: self.triples.len(),
            });
        }
        Ok(&self.triples[l - 1])
    }

    /// Variance first, then the (possibly small-signal) estimate.
    pub fn linear_form_interval(
        &self,
        a: &[f64],
        l: usize,
        alpha: f64,
        c_b: f64,
    ) -> Result<(LinearFormEstimate, IntervalEstimate)> {
        let t = self.triple(l)?;
        let v = variance_linear_form(a, t, &self.residual)?;
        let est = estimate_linear_form_modified(a, t, v.value, c_b, self.n())?;
        let ci = IntervalEstimate::new(est.value, v, alpha)?;
        Ok((est, ci))
    }

    pub fn eigenvalue_interval(&self, l: usize, alpha: f64) -> Result<(f64, IntervalEstimate)> {
        let t = self.triple(l)?;
        let v = variance_eigenvalue(t, &self.residual)?;
        let lambda = estimate_eigval(t);
        Ok((lambda, IntervalEstimate::new(lambda, v, alpha)?))
    }
}

/// Confidence interval for `aᵀu*_l` from a single observation.
pub fn ci_linear_form(
    a: &[f64],
    m: &DenseMatrix,
    r: usize,
    l: usize,
    alpha: f64,
    c_b: f64,
) -> Result<(LinearFormEstimate, IntervalEstimate)> {
    Decomposition::new(m, r, EigenOptions::default())?.linear_form_interval(a, l, alpha, c_b)
}

/// Confidence interval for `λ*_l` from a single observation.
pub fn ci_eigenvalue(m: &DenseMatrix, r: usize, l: usize, alpha: f64) -> Result<(f64, IntervalEstimate)> {
    Decomposition::new(m, r, EigenOptions::default())?.eigenvalue_interval(l, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::Branch;
    use crate::models::{build_ground_truth, rng_from_seed, Basis};
    use proptest::prelude::*;
    use rand::Rng;

    fn naive(a: &[f64], u: &[f64], lambda: f64, h: &DenseMatrix) -> f64 {
        let n = a.len();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += (a[i] * u[j] + a[j] * u[i]).powi(2) * h[(i, j)].powi(2);
            }
        }
        s / (4.0 * lambda * lambda)
    }

    #[test]
    fn two_term_hand_sum() {
        let mut h = DenseMatrix::zeros(3, 3);
        h[(0, 1)] = 1.0;
        h[(1, 0)] = 1.0;
        let v = estimate_variance_quadratic(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], 1.0, &h).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        assert_eq!(
            estimate_variance_quadratic(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], 1.0, &DenseMatrix::zeros(3, 3)).unwrap(),
            0.0
        );
        assert!(matches!(
            estimate_variance_quadratic(&[1.0; 3], &[1.0; 3], 0.0, &h),
            Err(Error::ZeroEigenvalue)
        ));
    }

    #[test]
    fn matches_double_loop() {
        let mut rng = rng_from_seed(11);
        let n = 6;
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let h = DenseMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let fast = estimate_variance_quadratic(&a, &u, 0.7, &h).unwrap();
        assert!((fast - naive(&a, &u, 0.7, &h)).abs() <= 1e-12 * fast.max(1.0));
    }

    #[test]
    fn eigenvalue_single_term() {
        let t = EigenTriple {
            index: 1,
            lambda: 3.0,
            u: vec![1.0, 0.0],
            w: vec![1.0, 0.0],
            imag_defect: 0.0,
        };
        let mut h = DenseMatrix::zeros(2, 2);
        h[(0, 0)] = 2.0;
        let res = ResidualNoise { h_hat: h, r: 1 };
        assert_eq!(variance_eigenvalue(&t, &res).unwrap().value, 4.0);
        // a = û makes the projected direction vanish.
        assert_eq!(variance_linear_form(&[1.0, 0.0], &t, &res).unwrap().value, 0.0);
    }

    #[test]
    fn interval_by_substitution() {
        let v = VarianceEstimate {
            value: 4e-4,
            kind: VarianceKind::Eigenvalue,
            lambda_used: 1.0,
        };
        let ci = IntervalEstimate::new(0.95, v, 0.05).unwrap();
        assert!((ci.lo - (0.95 - 1.959_964 * 0.02)).abs() < 1e-7);
        assert!((ci.hi - (0.95 + 1.959_964 * 0.02)).abs() < 1e-7);
        let half = IntervalEstimate::new(0.0, v, 0.5).unwrap();
        assert!((half.hi - 0.6745 * 0.02).abs() < 1e-4 * 0.02);
        assert!(IntervalEstimate::new(0.0, v, 1.0).is_err());
    }

    #[test]
    fn noiseless_intervals_collapse() {
        let truth = build_ground_truth(16, &[1.0, 0.95], &Basis::CannedRank2).unwrap();
        let m = truth.matrix();
        let a = truth.eigenvector(2);
        let (est, ci) = ci_linear_form(&a, &m, 2, 2, 0.05, 1.0).unwrap();
        assert_ne!(est.branch, Branch::SmallSignalAverage);
        assert!((est.value - 1.0).abs() < 1e-10);
        assert!(ci.width() < 1e-10);
        let (lambda, ci) = ci_eigenvalue(&m, 2, 2, 0.05).unwrap();
        assert!((lambda - 0.95).abs() < 1e-12);
        assert!(ci.width() < 1e-10 && ci.contains(lambda));
    }

    proptest! {
        #[test]
        fn quadratic_is_symmetric_and_scales(
            seed in 0u64..1000,
            n in 2usize..7,
            lambda in 0.1f64..3.0,
            c in 0.2f64..4.0,
        ) {
            let mut rng = rng_from_seed(seed);
            let a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let h = DenseMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let v = estimate_variance_quadratic(&a, &u, lambda, &h).unwrap();
            let swapped = estimate_variance_quadratic(&u, &a, lambda, &h).unwrap();
            prop_assert!((v - swapped).abs() <= 1e-14 * v.max(1e-300));
            let scaled = estimate_variance_quadratic(&a, &u, c * lambda, &h).unwrap();
            prop_assert!((scaled * c * c - v).abs() <= 1e-12 * v.max(1e-300));
            prop_assert!(v >= 0.0);
        }

        #[test]
        fn width_is_monotone_in_alpha(v in 1e-8f64..1.0, a1 in 0.001f64..0.99, a2 in 0.001f64..0.99) {
            prop_assume!(a1 < a2);
            let var = VarianceEstimate { value: v, kind: VarianceKind::LinearForm, lambda_used: 1.0 };
            let w1 = IntervalEstimate::new(0.3, var, a1).unwrap();
            let w2 = IntervalEstimate::new(0.3, var, a2).unwrap();
            prop_assert!(w1.width() > w2.width());
            prop_assert!((w1.width() - 2.0 * two_sided_z(a1) * v.sqrt()).abs() < 1e-12);
            prop_assert!(w1.lo <= w1.point && w1.point <= w1.hi);
        }
    }
}
