//! Block orthonormalization shared by the iterative solvers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::matrix::{axpy, dot, norm2, DenseMatrix};

/// Fixed seed for starting blocks; solver output must not depend on callers' RNGs.
const START_SEED: u64 = 0x05ee_d0f5_2b5d;

/// Deterministic Gaussian starting block with orthonormal columns.
pub(crate) fn random_orthonormal(rows: usize, cols: usize) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED ^ rows as u64);
    let mut q = DenseMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng));
    orthonormalize_columns(&mut q, &mut rng);
    q
}

/// Gram–Schmidt with one reorthogonalization pass, column by column.
///
/// Columns that collapse numerically are replaced by fresh random directions
/// orthogonal to the ones already accepted, so the result always has
/// orthonormal columns.
pub(crate) fn orthonormalize_columns(q: &mut DenseMatrix, rng: &mut ChaCha8Rng) {
    let (rows, cols) = (q.rows(), q.cols());
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cols);
    for j in 0..cols {
        let mut v = q.column(j);
        let original = norm2(&v);
        let mut accepted = false;
        for _attempt in 0..4 {
            for _pass in 0..2 {
                for b in &basis {
                    let c = dot(b, &v);
                    axpy(-c, b, &mut v);
                }
            }
            let nv = norm2(&v);
            if nv > 1e-10 * original.max(f64::MIN_POSITIVE) && nv > 0.0 {
                v.iter_mut().for_each(|x| *x /= nv);
                accepted = true;
                break;
            }
            v = (0..rows).map(|_| StandardNormal.sample(rng)).collect();
        }
        assert!(accepted, "could not extend orthonormal basis");
        basis.push(v);
    }
    for (j, b) in basis.iter().enumerate() {
        q.set_column(j, b);
    }
}

pub(crate) fn refill_rng(rows: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(START_SEED.rotate_left(17) ^ rows as u64)
}
