//! Reference implementations that share no code with the library.

#![allow(dead_code)]

use eigengap::DenseMatrix;
use num_complex::Complex64;

/// Monic characteristic polynomial coefficients `c[0] + c[1]x + … + x^n`
/// by the Faddeev–LeVerrier recursion.
pub fn char_poly(a: &DenseMatrix) -> Vec<f64> {
    let n = a.rows();
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut m = vec![vec![0.0; n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for p in 0..n {
                    s += a.row(i)[p] * m[p][j];
                }
                next[i][j] = s;
            }
            next[i][i] += c[n - k + 1];
        }
        m = next;
        let mut trace = 0.0;
        for i in 0..n {
            for p in 0..n {
                trace += a.row(i)[p] * m[p][i];
            }
        }
        c[n - k] = -trace / k as f64;
    }
    c
}

/// Companion matrix of a monic polynomial given low-order-first.
pub fn companion(c: &[f64]) -> DenseMatrix {
    let n = c.len() - 1;
    DenseMatrix::from_fn(n, n, |i, j| {
        if j == n - 1 {
            -c[i]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    })
}

fn horner(c: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &ck in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + ck;
    }
    (p, dp)
}

/// Roots of the companion matrix's polynomial by simultaneous Weierstrass
/// iteration followed by Newton polishing.
pub fn poly_roots(c: &[f64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let radius = 1.0 + c[..n].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32 + 1) * (radius / 2.0)).collect();
    for _ in 0..2000 {
        let mut change = 0.0f64;
        for k in 0..n {
            let (p, _) = horner(c, z[k]);
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if j != k {
                    denom *= z[k] - z[j];
                }
            }
            let step = p / denom;
            z[k] -= step;
            change = change.max(step.norm());
        }
        if change < 1e-15 * radius {
            break;
        }
    }
    for root in &mut z {
        for _ in 0..3 {
            let (p, dp) = horner(c, *root);
            if dp.norm() > 0.0 {
                *root -= p / dp;
            }
        }
    }
    z
}

/// Largest distance between matched members of two equally sized multisets.
pub fn spectral_mismatch(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

/// All singular values, descending, by one-sided Jacobi rotations on columns.
pub fn jacobi_singular_values(m: &DenseMatrix) -> Vec<f64> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut c: Vec<Vec<f64>> = (0..cols).map(|j| m.column(j)).collect();
    for _ in 0..100 {
        let mut off = 0.0f64;
        for p in 0..cols {
            for q in p + 1..cols {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..rows {
                    alpha += c[p][i] * c[p][i];
                    beta += c[q][i] * c[q][i];
                    gamma += c[p][i] * c[q][i];
                }
                if gamma == 0.0 {
                    continue;
                }
                off = off.max(gamma.abs() / (alpha * beta).sqrt());
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for i in 0..rows {
                    let (x, y) = (c[p][i], c[q][i]);
                    c[p][i] = cs * x - sn * y;
                    c[q][i] = sn * x + cs * y;
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut s: Vec<f64> = c.iter().map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// `(1/(4λ²)) Σ_i Σ_j (a_i u_j + a_j u_i)² w_ij` evaluated term by term.
pub fn double_loop(a: &[f64], u: &[f64], lambda: f64, w: impl Fn(usize, usize) -> f64) -> f64 {
    let n = a.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            total += (a[i] * u[j] + a[j] * u[i]).powi(2) * w(i, j);
        }
    }
    total / (4.0 * lambda.powi(2))
}
