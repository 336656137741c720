//! Leading eigentriples `(λ_l, u_l, w_l)` of an asymmetric matrix.
//!
//! The r eigenvalues of largest modulus are selected, then ordered by
//! descending real part. Each right eigenvector is paired with the left
//! eigenvector (an eigenvector of `Mᵀ`) whose eigenvalue is nearest. Signs
//! are fixed so that `wᵀu ≥ 0` and the largest-magnitude entry of `u` is
//! positive.
//!
//! For large matrices the leading eigenpairs come from block subspace
//! iteration with a Rayleigh–Ritz projection; the projected problem goes
//! through [`eigen_decompose`]. Small matrices are decomposed in full.

use std::cmp::Ordering;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::eigen::{complex_residual, eigen_decompose, TOL_EIG};
use crate::linalg::subspace::{orthonormalize_columns, random_orthonormal, refill_rng};
use crate::matrix::{dot, DenseMatrix};

/// Default realness tolerance, relative to `1 + |λ|`.
pub const TOL_REAL: f64 = 1e-8;
/// Left/right eigenvalues must agree to this fraction of `‖M‖_F`.
const MATCH_TOL: f64 = 1e-6;
/// `Auto` decomposes in full up to this dimension.
const DENSE_MAX_DIM: usize = 96;
const GUARD_VECTORS: usize = 8;
const RITZ_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 3000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenMethod {
    /// Full decomposition for small matrices, subspace iteration otherwise.
    #[default]
    Auto,
    Dense,
    Subspace,
}

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    pub tol_real: f64,
    pub method: EigenMethod,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol_real: TOL_REAL,
            method: EigenMethod::Auto,
        }
    }
}

/// A certified-real eigenvalue with unit right (`u`) and left (`w`) eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenTriple {
    /// 1-based position after ordering by descending real part.
    pub index: usize,
    pub lambda: f64,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    /// Largest imaginary part discarded when the pair was certified real.
    pub imag_defect: f64,
}

impl EigenTriple {
    pub fn w_dot_u(&self) -> f64 {
        dot(&self.w, &self.u)
    }

    /// Flips `u` and `w` together; every estimator is invariant to this.
    pub fn flip(&mut self) {
        self.u.iter_mut().for_each(|x| *x = -*x);
        self.w.iter_mut().for_each(|x| *x = -*x);
    }

    /// Flips jointly so that `uᵀ reference ≥ 0`.
    pub fn align_to(&mut self, reference: &[f64]) {
        if dot(&self.u, reference) < 0.0 {
            self.flip();
        }
    }
}

struct Candidate {
    value: Complex64,
    vector: Vec<Complex64>,
}

fn by_modulus_then_real(a: &Complex64, b: &Complex64) -> Ordering {
    b.norm()
        .total_cmp(&a.norm())
        .then(b.re.total_cmp(&a.re))
        .then(b.im.signum().total_cmp(&a.im.signum()))
}

/// Returns the `r` leading eigentriples of `m`.
pub fn top_r_eigentriples(m: &DenseMatrix, r: usize, opts: EigenOptions) -> Result<Vec<EigenTriple>> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    if r == 0 || r > n {
        return Err(Error::RankOutOfRange { r, max: n });
    }
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let norm = m.frobenius_norm();
    let mt = m.transpose();
    let want = (r + 1).min(n);

    let use_dense = match opts.method {
        EigenMethod::Dense => true,
        EigenMethod::Subspace => false,
        EigenMethod::Auto => n <= DENSE_MAX_DIM || r + 1 + GUARD_VECTORS >= n,
    };
    let (right, left) = if use_dense {
        (dense_candidates(m)?, dense_candidates(&mt)?)
    } else {
        match (ritz_candidates(m, r, want), ritz_candidates(&mt, r, want)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(Error::NoConvergence { .. }), _) | (_, Err(Error::NoConvergence { .. }))
                if opts.method == EigenMethod::Auto =>
            {
                (dense_candidates(m)?, dense_candidates(&mt)?)
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    };

    let mut selected = Vec::with_capacity(r);
    for (l, cand) in right.iter().take(r).enumerate() {
        let (u, defect) = certify_real(cand, opts.tol_real).ok_or(Error::NotReal {
            index: l + 1,
            defect: imag_size(cand),
        })?;
        selected.push((cand.value.re, u, defect));
    }
    if right.len() > r {
        let gap = right[r - 1].value.norm() - right[r].value.norm();
        if gap <= opts.tol_real * (1.0 + right[r - 1].value.norm()) {
            return Err(Error::DegenerateSpectrum { r, gap });
        }
    }
    selected.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut used = vec![false; left.len()];
    let mut out = Vec::with_capacity(r);
    for (l, (lambda, u, defect_u)) in selected.into_iter().enumerate() {
        let target = Complex64::new(lambda, 0.0);
        let (best, dist) = left
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, c)| (i, (c.value - target).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .ok_or(Error::UnmatchedLeft {
                lambda,
                tol: MATCH_TOL * norm,
            })?;
        if dist > MATCH_TOL * norm.max(f64::MIN_POSITIVE) {
            return Err(Error::UnmatchedLeft {
                lambda,
                tol: MATCH_TOL * norm,
            });
        }
        used[best] = true;
        let (w, defect_w) = certify_real(&left[best], opts.tol_real).ok_or(Error::NotReal {
            index: l + 1,
            defect: imag_size(&left[best]),
        })?;

        let mut triple = EigenTriple {
            index: l + 1,
            lambda,
            u,
            w,
            imag_defect: defect_u.max(defect_w),
        };
        if triple.w_dot_u() < 0.0 {
            triple.w.iter_mut().for_each(|x| *x = -*x);
        }
        let lead = triple
            .u
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |acc, (i, &x)| if x.abs() > acc.1.abs() { (i, x) } else { acc });
        if lead.1 < 0.0 {
            triple.flip();
        }
        check_residual(m, triple.lambda, &triple.u, norm)?;
        check_residual(&mt, triple.lambda, &triple.w, norm)?;
        out.push(triple);
    }
    Ok(out)
}

fn imag_size(c: &Candidate) -> f64 {
    c.value.im.abs()
}

/// Rotates the vector so its largest entry is real and positive, then checks
/// that what is left imaginary is within tolerance.
fn certify_real(c: &Candidate, tol_real: f64) -> Option<(Vec<f64>, f64)> {
    let bound = tol_real * (1.0 + c.value.norm());
    if c.value.im.abs() > bound {
        return None;
    }
    let pivot = c
        .vector
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(Complex64::new(1.0, 0.0));
    let phase = if pivot.norm() > 0.0 {
        pivot.conj() / pivot.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let rotated: Vec<Complex64> = c.vector.iter().map(|z| z * phase).collect();
    let imag = rotated.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    if imag > bound {
        return None;
    }
    let mut re: Vec<f64> = rotated.iter().map(|z| z.re).collect();
    let nrm = dot(&re, &re).sqrt();
    re.iter_mut().for_each(|x| *x /= nrm);
    Some((re, c.value.im.abs().max(imag)))
}

fn check_residual(m: &DenseMatrix, lambda: f64, v: &[f64], norm: f64) -> Result<()> {
    let vc: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let res = complex_residual(m, Complex64::new(lambda, 0.0), &vc);
    if res > TOL_EIG * norm.max(f64::MIN_POSITIVE) {
        return Err(Error::NoConvergence {
            what: "eigenpair residual check",
            iterations: 0,
        });
    }
    Ok(())
}

fn dense_candidates(m: &DenseMatrix) -> Result<Vec<Candidate>> {
    let spec = eigen_decompose(m)?;
    let mut cands: Vec<Candidate> = spec
        .eigenvalues
        .into_iter()
        .zip(spec.right_vectors)
        .map(|(value, vector)| Candidate { value, vector })
        .collect();
    cands.sort_by(|a, b| by_modulus_then_real(&a.value, &b.value));
    Ok(cands)
}

/// Leading Ritz pairs of `m` from orthogonal iteration. The top `r` are
/// converged to `RITZ_TOL·‖M‖_F`; the rest of the `want` returned are
/// approximations used only for the separation check.
fn ritz_candidates(m: &DenseMatrix, r: usize, want: usize) -> Result<Vec<Candidate>> {
    let n = m.rows();
    let k = (want + GUARD_VECTORS).min(n);
    let norm = m.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut q = random_orthonormal(n, k);
    let mut rng = refill_rng(n);

    for _ in 0..MAX_SWEEPS {
        let z = m.matmul(&q);
        let b = q.t_matmul(&z);
        let spec = eigen_decompose(&b)?;
        let mut order: Vec<usize> = (0..spec.len()).collect();
        order.sort_by(|&i, &j| by_modulus_then_real(&spec.eigenvalues[i], &spec.eigenvalues[j]));

        let mut cands = Vec::with_capacity(want);
        let mut converged = true;
        for (rank, &idx) in order.iter().take(want).enumerate() {
            let theta = spec.eigenvalues[idx];
            let y = &spec.right_vectors[idx];
            let mut x = vec![Complex64::new(0.0, 0.0); n];
            let mut mx = vec![Complex64::new(0.0, 0.0); n];
            for i in 0..n {
                let (qi, zi) = (q.row(i), z.row(i));
                for c in 0..k {
                    x[i] += y[c] * qi[c];
                    mx[i] += y[c] * zi[c];
                }
            }
            if rank < r {
                let res: f64 = x
                    .iter()
                    .zip(&mx)
                    .map(|(xi, mxi)| (mxi - theta * xi).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                converged &= res <= RITZ_TOL * norm;
            }
            cands.push(Candidate {
                value: theta,
                vector: x,
            });
        }
        if converged {
            return Ok(cands);
        }
        q = z;
        orthonormalize_columns(&mut q, &mut rng);
    }
    Err(Error::NoConvergence {
        what: "eigen subspace iteration",
        iterations: MAX_SWEEPS,
    })
}
