//! Point estimators built from the leading left and right eigenvectors of
//! the asymmetric observation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{svd_truncate, EigenTriple};
use crate::matrix::{dot, norm2, DenseMatrix};

/// Smallest `wᵀu` accepted as a de-biasing denominator.
pub const DENOM_GUARD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// `½ aᵀ(u + w)`, signed.
    SmallSignalAverage,
    /// `√|(aᵀu)(aᵀw)/(wᵀu)|`, a magnitude.
    DebiasedSqrt,
    /// The de-biased value exceeded `‖a‖` and was clipped to it.
    ClippedAtNorm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFormEstimate {
    pub value: f64,
    pub branch: Branch,
    /// Eigen-index `l` the estimate refers to.
    pub index: usize,
}

impl LinearFormEstimate {
    /// The value with a sign attached: the magnitude branches take the sign
    /// of `aᵀ(u + w)`, which is how a sign-aligned target is compared.
    pub fn signed(&self, a: &[f64], t: &EigenTriple) -> f64 {
        match self.branch {
            Branch::SmallSignalAverage => self.value,
            _ => {
                let s = dot(a, &t.u) + dot(a, &t.w);
                if s < 0.0 {
                    -self.value
                } else {
                    self.value
                }
            }
        }
    }
}

/// `(u + w)/‖u + w‖`.
pub fn estimate_eigvec(t: &EigenTriple) -> Result<Vec<f64>> {
    let sum: Vec<f64> = t.u.iter().zip(&t.w).map(|(a, b)| a + b).collect();
    let nrm = norm2(&sum);
    if !(nrm > 1e-10) {
        return Err(Error::SignConvention { index: t.index });
    }
    Ok(sum.into_iter().map(|x| x / nrm).collect())
}

pub fn estimate_eigval(t: &EigenTriple) -> f64 {
    t.lambda
}

/// `min{√|(aᵀu)(aᵀw)/(wᵀu)|, ‖a‖}`.
pub fn estimate_linear_form(a: &[f64], t: &EigenTriple) -> Result<LinearFormEstimate> {
    check_len(a, t)?;
    let wu = t.w_dot_u();
    if !(wu > DENOM_GUARD) {
        return Err(Error::DegenerateDenominator { value: wu });
    }
    let raw = (dot(a, &t.u) * dot(a, &t.w) / wu).abs().sqrt();
    let cap = norm2(a);
    let (value, branch) = if raw > cap {
        (cap, Branch::ClippedAtNorm)
    } else {
        (raw, Branch::DebiasedSqrt)
    };
    Ok(LinearFormEstimate {
        value,
        branch,
        index: t.index,
    })
}

/// Threshold `c_b √v̂ (ln n)^{3/2}` below which the small-signal branch is used.
pub fn small_signal_threshold(v_hat: f64, c_b: f64, n: usize) -> f64 {
    c_b * v_hat.sqrt() * (n as f64).ln().powf(1.5)
}

/// Averages `aᵀu` and `aᵀw` when `|aᵀu|` is within noise level, otherwise
/// defers to [`estimate_linear_form`]. `v_hat` must be computed beforehand.
pub fn estimate_linear_form_modified(
    a: &[f64],
    t: &EigenTriple,
    v_hat: f64,
    c_b: f64,
    n: usize,
) -> Result<LinearFormEstimate> {
    check_len(a, t)?;
    if !(v_hat >= 0.0) || !v_hat.is_finite() {
        return Err(Error::InvalidParameter(format!("variance estimate {v_hat} is not a finite nonnegative number")));
    }
    let au = dot(a, &t.u);
    if au.abs() <= small_signal_threshold(v_hat, c_b, n) {
        return Ok(LinearFormEstimate {
            value: 0.5 * (au + dot(a, &t.w)),
            branch: Branch::SmallSignalAverage,
            index: t.index,
        });
    }
    estimate_linear_form(a, t)
}

fn check_len(a: &[f64], t: &EigenTriple) -> Result<()> {
    if a.len() != t.u.len() {
        return Err(Error::Shape(format!(
            "direction has length {} but eigenvectors have length {}",
            a.len(),
            t.u.len()
        )));
    }
    Ok(())
}

/// `Ĥ = M − M_svd,r`.
#[derive(Debug, Clone)]
pub struct ResidualNoise {
    pub h_hat: DenseMatrix,
    pub r: usize,
}

pub fn residual_noise_matrix(m: &DenseMatrix, r: usize) -> Result<ResidualNoise> {
    let low = svd_truncate(m, r)?;
    Ok(ResidualNoise { h_hat: m.sub(&low), r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{top_r_eigentriples, EigenOptions};
    use crate::models::{build_ground_truth, sample_noise, Basis, NoiseFamily, NoiseSpec};
    use proptest::prelude::*;

    fn triple(u: Vec<f64>, w: Vec<f64>) -> EigenTriple {
        EigenTriple {
            index: 1,
            lambda: 1.0,
            u,
            w,
            imag_defect: 0.0,
        }
    }

    fn unit(v: Vec<f64>) -> Vec<f64> {
        let n = norm2(&v);
        v.into_iter().map(|x| x / n).collect()
    }

    #[test]
    fn eigvec_of_identical_pair() {
        let u = unit(vec![1.0, 2.0, -2.0]);
        assert_eq!(estimate_eigvec(&triple(u.clone(), u.clone())).unwrap(), u);
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        assert!(matches!(
            estimate_eigvec(&triple(u, neg)),
            Err(Error::SignConvention { .. })
        ));
    }

    #[test]
    fn noiseless_planted_case() {
        let truth = build_ground_truth(10, &[1.0, 0.5], &Basis::RandomOrthonormal { seed: 3 }).unwrap();
        let ts = top_r_eigentriples(&truth.matrix(), 2, EigenOptions::default()).unwrap();
        for (l, t) in ts.iter().enumerate() {
            let ustar = truth.eigenvector(l + 1);
            let u = estimate_eigvec(t).unwrap();
            assert!(crate::matrix::sign_blind_distance(&u, &ustar) < 1e-10);
            assert!((estimate_eigval(t) - truth.eigenvalue(l + 1)).abs() < 1e-12);
            let est = estimate_linear_form(&ustar, t).unwrap();
            assert!((est.value - 1.0).abs() < 1e-10);
            let other = truth.eigenvector(2 - l);
            assert!(estimate_linear_form(&other, t).unwrap().value < 1e-7);
        }
        let t = &ts[0];
        let mut a = truth.eigenvector(1);
        if dot(&a, &t.u) < 0.0 {
            a.iter_mut().for_each(|x| *x = -*x);
        }
        let modified = estimate_linear_form_modified(&a, t, 0.0, 1.0, 10).unwrap();
        assert_ne!(modified.branch, Branch::SmallSignalAverage);
        assert!((modified.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn clip_binds_when_debiasing_overshoots() {
        let u = unit(vec![1.0, 1.0]);
        let w = unit(vec![1.0, 0.2]);
        let a = vec![1.0, 1.0];
        let raw = (dot(&a, &u) * dot(&a, &w) / dot(&w, &u)).sqrt();
        let est = estimate_linear_form(&a, &triple(u.clone(), w.clone())).unwrap();
        if raw > norm2(&a) {
            assert_eq!(est.branch, Branch::ClippedAtNorm);
            assert_eq!(est.value, norm2(&a));
        } else {
            assert_eq!(est.branch, Branch::DebiasedSqrt);
            assert!((est.value - raw).abs() < 1e-15);
        }
        let spike = estimate_linear_form(&u, &triple(u.clone(), u.clone())).unwrap();
        assert!((spike.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn orthogonal_direction_takes_small_branch() {
        let u = unit(vec![1.0, 0.0, 0.0]);
        let w = unit(vec![0.9, 0.3, -0.1]);
        let a = vec![0.0, 2.0, 1.0];
        let est = estimate_linear_form_modified(&a, &triple(u, w.clone()), 1e-6, 1.0, 100).unwrap();
        assert_eq!(est.branch, Branch::SmallSignalAverage);
        assert!((est.value - 0.5 * dot(&a, &w)).abs() < 1e-15);
    }

    #[test]
    fn degenerate_denominator() {
        let t = triple(vec![1.0, 0.0], vec![0.0, 1.0]);
        assert!(matches!(
            estimate_linear_form(&[1.0, 1.0], &t),
            Err(Error::DegenerateDenominator { .. })
        ));
    }

    #[test]
    fn residual_of_exact_low_rank_is_zero() {
        let truth = build_ground_truth(12, &[2.0, -1.0], &Basis::RandomOrthonormal { seed: 5 }).unwrap();
        let res = residual_noise_matrix(&truth.matrix(), 2).unwrap();
        assert!(res.h_hat.max_abs() < 1e-10);
        assert!(residual_noise_matrix(&truth.matrix(), 0).is_err());
    }

    #[test]
    fn residual_tracks_tiny_noise() {
        let n = 50;
        let truth = build_ground_truth(n, &[1.0, 0.95], &Basis::CannedRank2).unwrap();
        let spec = NoiseSpec::homoscedastic(n, 1e-6, NoiseFamily::Gaussian).unwrap();
        let h = sample_noise(&spec, 21);
        let res = residual_noise_matrix(&truth.matrix().add(&h), 2).unwrap();
        assert!(res.h_hat.max_abs_diff(&h) <= 1e-4);
    }

    fn arb_triple() -> impl Strategy<Value = (EigenTriple, Vec<f64>)> {
        (3usize..8).prop_flat_map(|n| {
            (
                prop::collection::vec(-1.0f64..1.0, n),
                prop::collection::vec(-0.3f64..0.3, n),
                prop::collection::vec(-1.0f64..1.0, n),
            )
                .prop_filter_map("degenerate", |(u, d, a)| {
                    let nu = norm2(&u);
                    if nu < 0.1 {
                        return None;
                    }
                    let u: Vec<f64> = u.iter().map(|x| x / nu).collect();
                    let w: Vec<f64> = u.iter().zip(&d).map(|(x, y)| x + y).collect();
                    let nw = norm2(&w);
                    let w: Vec<f64> = w.iter().map(|x| x / nw).collect();
                    (dot(&u, &w) > 0.2).then(|| (triple(u, w), a))
                })
        })
    }

    proptest! {
        #[test]
        fn homogeneous_in_direction((t, a) in arb_triple(), c in -3.0f64..3.0) {
            prop_assume!(c.abs() > 1e-3);
            let base = estimate_linear_form(&a, &t).unwrap();
            let ca: Vec<f64> = a.iter().map(|x| c * x).collect();
            let scaled = estimate_linear_form(&ca, &t).unwrap();
            prop_assert_eq!(base.branch, scaled.branch);
            prop_assert!((scaled.value - c.abs() * base.value).abs() <= 1e-12 * (1.0 + scaled.value));
            prop_assert!(scaled.value <= norm2(&ca) * (1.0 + 1e-15));
        }

        #[test]
        fn invariant_under_joint_flip((t, a) in arb_triple()) {
            let mut flipped = t.clone();
            flipped.flip();
            let x = estimate_linear_form(&a, &t).unwrap();
            let y = estimate_linear_form(&a, &flipped).unwrap();
            prop_assert_eq!(x.value, y.value);
            let u1 = estimate_eigvec(&t).unwrap();
            let u2 = estimate_eigvec(&flipped).unwrap();
            prop_assert!(u1.iter().zip(&u2).all(|(p, q)| (p + q).abs() < 1e-15));
        }

        #[test]
        fn modified_matches_plain_above_threshold((t, a) in arb_triple(), v in 0.0f64..1e-3) {
            let m = estimate_linear_form_modified(&a, &t, v, 1.0, 50).unwrap();
            if dot(&a, &t.u).abs() > small_signal_threshold(v, 1.0, 50) {
                prop_assert_eq!(m, estimate_linear_form(&a, &t).unwrap());
            } else {
                prop_assert_eq!(m.branch, Branch::SmallSignalAverage);
            }
        }
    }
}
