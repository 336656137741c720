//! Best rank-r approximation in Frobenius norm.
//!
//! Small problems are solved exactly through the Gram matrix of the short
//! side. Large ones use block subspace iteration on `M Mᵀ` with a
//! Rayleigh–Ritz step each sweep, stopping once the top-r Ritz residuals are
//! at rounding level.

use crate::error::{Error, Result};
use crate::linalg::subspace::{orthonormalize_columns, random_orthonormal, refill_rng};
use crate::linalg::symmetric::symmetric_eigen;
use crate::matrix::{norm2, DenseMatrix};

/// Short-side dimension up to which the exact Gram route is used.
const EXACT_MAX_DIM: usize = 64;
const OVERSAMPLE: usize = 10;
const MAX_SWEEPS: usize = 2000;
const RITZ_TOL: f64 = 1e-11;
/// Accepted on budget exhaustion: still far below any tolerance downstream.
const RITZ_TOL_FALLBACK: f64 = 1e-9;

/// Top-r singular triplets: `M ≈ U diag(s) Vᵀ`.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    /// rows × r, orthonormal columns.
    pub u: DenseMatrix,
    pub s: Vec<f64>,
    /// cols × r, orthonormal columns.
    pub v: DenseMatrix,
}

impl TruncatedSvd {
    pub fn reassemble(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for (x, s) in us.row_mut(i).iter_mut().zip(&self.s) {
                *x *= s;
            }
        }
        us.matmul(&self.v.transpose())
    }
}

/// `argmin_{rank Z ≤ r} ‖M − Z‖_F`.
pub fn svd_truncate(m: &DenseMatrix, r: usize) -> Result<DenseMatrix> {
    Ok(truncated_svd(m, r)?.reassemble())
}

pub fn truncated_svd(m: &DenseMatrix, r: usize) -> Result<TruncatedSvd> {
    let p = m.rows().min(m.cols());
    if r == 0 || r > p {
        return Err(Error::RankOutOfRange { r, max: p });
    }
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    if m.rows() > m.cols() {
        let t = truncated_svd(&m.transpose(), r)?;
        return Ok(TruncatedSvd {
            u: t.v,
            s: t.s,
            v: t.u,
        });
    }
    // rows <= cols from here on.
    let u = if p <= EXACT_MAX_DIM || r + OVERSAMPLE >= p {
        let gram = m.matmul(&m.transpose());
        let (_, vecs) = symmetric_eigen(&gram)?;
        DenseMatrix::from_fn(p, r, |i, j| vecs[(i, j)])
    } else {
        dominant_left_subspace(m, r)?
    };

    // v_j = Mᵀ u_j / s_j, or any unit vector orthogonal to the rest when s_j = 0.
    let mtu = m.t_matmul(&u);
    let mut s = Vec::with_capacity(r);
    let mut vcols: Vec<Vec<f64>> = Vec::with_capacity(r);
    for j in 0..r {
        let col = mtu.column(j);
        let nrm = norm2(&col);
        s.push(nrm);
        vcols.push(if nrm > 0.0 {
            col.iter().map(|x| x / nrm).collect()
        } else {
            col
        });
    }
    let mut v = DenseMatrix::from_columns(&vcols);
    if s.contains(&0.0) {
        let mut rng = refill_rng(v.rows());
        orthonormalize_columns(&mut v, &mut rng);
    }
    Ok(TruncatedSvd { u, s, v })
}

/// Top-r left singular vectors for `rows ≤ cols`.
fn dominant_left_subspace(m: &DenseMatrix, r: usize) -> Result<DenseMatrix> {
    let rows = m.rows();
    let k = (r + OVERSAMPLE).min(rows);
    let mut q = random_orthonormal(rows, k);
    let mut rng = refill_rng(rows);
    let mut last_worst = f64::INFINITY;
    let mt = m.transpose();
    for _ in 0..MAX_SWEEPS {
        let y = mt.matmul(&q); // cols × k
        let z = m.matmul(&y); // rows × k, = M Mᵀ Q
        let gram = y.t_matmul(&y); // Qᵀ M Mᵀ Q
        let (vals, vecs) = symmetric_eigen(&gram)?;
        let top = vals[0].max(f64::MIN_POSITIVE);

        let vr = DenseMatrix::from_fn(k, r, |i, j| vecs[(i, j)]);
        let u = q.matmul(&vr);
        let zv = z.matmul(&vr);
        let mut worst: f64 = 0.0;
        for j in 0..r {
            let res: f64 = (0..rows)
                .map(|i| {
                    let d = zv[(i, j)] - vals[j] * u[(i, j)];
                    d * d
                })
                .sum::<f64>()
                .sqrt();
            worst = worst.max(res / top);
        }
        last_worst = worst;
        if worst <= RITZ_TOL {
            return Ok(u);
        }
        q = z;
        orthonormalize_columns(&mut q, &mut rng);
    }
    if last_worst <= RITZ_TOL_FALLBACK {
        let y = m.t_matmul(&q);
        let (_, vecs) = symmetric_eigen(&y.t_matmul(&y))?;
        let vr = DenseMatrix::from_fn(k, r, |i, j| vecs[(i, j)]);
        return Ok(q.matmul(&vr));
    }
    Err(Error::NoConvergence {
        what: "truncated SVD subspace iteration",
        iterations: MAX_SWEEPS,
    })
}
