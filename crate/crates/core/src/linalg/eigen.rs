//! Full eigen-decomposition of a dense real nonsymmetric matrix.
//!
//! The pipeline is the classical one: diagonal balancing, Householder
//! reduction to upper Hessenberg form, Francis implicit double-shift QR down
//! to real Schur form, then eigenvectors by back-substitution on the
//! quasi-triangular factor followed by the accumulated back-transformation.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Relative residual tolerance every returned eigenpair must meet.
pub const TOL_EIG: f64 = 1e-8;

/// QR sweeps allowed per unit of dimension.
const SWEEPS_PER_DIM: usize = 40;

/// All eigenvalues of a square matrix with unit right eigenvectors.
///
/// Complex-conjugate pairs are stored next to each other, the member with
/// positive imaginary part first.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub right_vectors: Vec<Vec<Complex64>>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Largest `‖Av − λv‖₂` over all pairs.
    pub fn max_residual(&self, a: &DenseMatrix) -> f64 {
        self.eigenvalues
            .iter()
            .zip(&self.right_vectors)
            .map(|(&lambda, v)| complex_residual(a, lambda, v))
            .fold(0.0, f64::max)
    }
}

pub(crate) fn complex_residual(a: &DenseMatrix, lambda: Complex64, v: &[Complex64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.rows() {
        let mut s = Complex64::new(0.0, 0.0);
        for (&aij, &vj) in a.row(i).iter().zip(v) {
            s += vj * aij;
        }
        acc += (s - lambda * v[i]).norm_sqr();
    }
    acc.sqrt()
}

/// Eigenvalues and unit right eigenvectors of a square matrix.
pub fn eigen_decompose(a: &DenseMatrix) -> Result<Spectrum> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = a.rows();
    let mut h = a.clone();
    let scale = balance(&mut h);
    let mut v = DenseMatrix::identity(n);
    reduce_to_hessenberg(&mut h, &mut v);
    let (re, im) = schur_and_vectors(&mut h, &mut v)?;

    let mut eigenvalues = Vec::with_capacity(n);
    let mut right_vectors = Vec::with_capacity(n);
    let mut j = 0;
    while j < n {
        if im[j] == 0.0 {
            let vec: Vec<Complex64> = (0..n)
                .map(|i| Complex64::new(scale[i] * v[(i, j)], 0.0))
                .collect();
            eigenvalues.push(Complex64::new(re[j], 0.0));
            right_vectors.push(normalize(vec));
            j += 1;
        } else {
            // Columns j and j+1 hold the real and imaginary parts of the
            // vector for re[j] + i·im[j] (im[j] > 0).
            let vec: Vec<Complex64> = (0..n)
                .map(|i| Complex64::new(scale[i] * v[(i, j)], scale[i] * v[(i, j + 1)]))
                .collect();
            let vec = normalize(vec);
            let conj: Vec<Complex64> = vec.iter().map(|z| z.conj()).collect();
            eigenvalues.push(Complex64::new(re[j], im[j]));
            eigenvalues.push(Complex64::new(re[j + 1], im[j + 1]));
            right_vectors.push(vec);
            right_vectors.push(conj);
            j += 2;
        }
    }
    Ok(Spectrum {
        eigenvalues,
        right_vectors,
    })
}

fn normalize(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for z in &mut v {
            *z /= norm;
        }
    }
    v
}

/// Radix-2 diagonal balancing. Replaces `a` with `D⁻¹ a D` and returns `D`.
fn balance(a: &mut DenseMatrix) -> Vec<f64> {
    const RADIX: f64 = 2.0;
    let n = a.rows();
    let mut d = vec![1.0; n];
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                d[i] *= f;
                let inv = 1.0 / f;
                for x in a.row_mut(i) {
                    *x *= inv;
                }
                for k in 0..n {
                    a[(k, i)] *= f;
                }
            }
        }
    }
    d
}

/// Householder reduction to upper Hessenberg form; `v` accumulates the
/// orthogonal similarity.
fn reduce_to_hessenberg(h: &mut DenseMatrix, v: &mut DenseMatrix) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    let high = n - 1;
    let mut ort = vec![0.0; n];
    for m in 1..high {
        let scale: f64 = (m..=high).map(|i| h[(i, m - 1)].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut hh = 0.0;
        for i in (m..=high).rev() {
            ort[i] = h[(i, m - 1)] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;

        for j in m..n {
            let mut f = 0.0;
            for i in m..=high {
                f += ort[i] * h[(i, j)];
            }
            f /= hh;
            for i in m..=high {
                h[(i, j)] -= f * ort[i];
            }
        }
        for i in 0..=high {
            let row = h.row_mut(i);
            let mut f = 0.0;
            for j in m..=high {
                f += ort[j] * row[j];
            }
            f /= hh;
            for j in m..=high {
                row[j] -= f * ort[j];
            }
        }
        ort[m] *= scale;
        h[(m, m - 1)] = scale * g;
    }

    for m in (1..high).rev() {
        if h[(m, m - 1)] == 0.0 {
            continue;
        }
        for i in m + 1..=high {
            ort[i] = h[(i, m - 1)];
        }
        for j in m..=high {
            let mut g = 0.0;
            for i in m..=high {
                g += ort[i] * v[(i, j)];
            }
            g = (g / ort[m]) / h[(m, m - 1)];
            for i in m..=high {
                v[(i, j)] += g * ort[i];
            }
        }
    }
}

fn cdiv(xr: f64, xi: f64, yr: f64, yi: f64) -> (f64, f64) {
    if yr.abs() > yi.abs() {
        let r = yi / yr;
        let d = yr + r * yi;
        ((xr + r * xi) / d, (xi - r * xr) / d)
    } else {
        let r = yr / yi;
        let d = yi + r * yr;
        ((r * xr + xi) / d, (r * xi - xr) / d)
    }
}

/// Francis double-shift QR on a Hessenberg matrix, then back-substitution.
///
/// On return the columns of `v` are the (unnormalized) eigenvectors in the
/// real-pair layout; the returned vectors are real and imaginary parts of the
/// eigenvalues.
#[allow(clippy::many_single_char_names, unused_assignments)]
fn schur_and_vectors(h: &mut DenseMatrix, v: &mut DenseMatrix) -> Result<(Vec<f64>, Vec<f64>)> {
    let nn = h.rows();
    let mut d = vec![0.0; nn];
    let mut e = vec![0.0; nn];
    let eps = f64::EPSILON;
    let mut exshift = 0.0;
    let (mut p, mut q, mut r, mut s, mut z) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut w, mut x, mut y);

    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }

    let budget = SWEEPS_PER_DIM * nn.max(1);
    let mut sweeps = 0usize;
    let mut iter = 0usize;
    // `n` is the active bottom row; signed so the loop can run past zero.
    let mut n = nn as isize - 1;
    while n >= 0 {
        let nu = n as usize;
        let mut l = nu;
        while l > 0 {
            s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[(l, l - 1)].abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == nu {
            h[(nu, nu)] += exshift;
            d[nu] = h[(nu, nu)];
            e[nu] = 0.0;
            n -= 1;
            iter = 0;
        } else if l + 1 == nu {
            w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            p = (h[(nu - 1, nu - 1)] - h[(nu, nu)]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            h[(nu, nu)] += exshift;
            h[(nu - 1, nu - 1)] += exshift;
            x = h[(nu, nu)];

            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                d[nu - 1] = x + z;
                d[nu] = d[nu - 1];
                if z != 0.0 {
                    d[nu] = x - w / z;
                }
                e[nu - 1] = 0.0;
                e[nu] = 0.0;
                x = h[(nu, nu - 1)];
                s = x.abs() + z.abs();
                p = x / s;
                q = z / s;
                r = (p * p + q * q).sqrt();
                p /= r;
                q /= r;
                for j in nu - 1..nn {
                    z = h[(nu - 1, j)];
                    h[(nu - 1, j)] = q * z + p * h[(nu, j)];
                    h[(nu, j)] = q * h[(nu, j)] - p * z;
                }
                for i in 0..=nu {
                    z = h[(i, nu - 1)];
                    h[(i, nu - 1)] = q * z + p * h[(i, nu)];
                    h[(i, nu)] = q * h[(i, nu)] - p * z;
                }
                for i in 0..nn {
                    z = v[(i, nu - 1)];
                    v[(i, nu - 1)] = q * z + p * v[(i, nu)];
                    v[(i, nu)] = q * v[(i, nu)] - p * z;
                }
            } else {
                d[nu - 1] = x + p;
                d[nu] = x + p;
                e[nu - 1] = z;
                e[nu] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            sweeps += 1;
            if sweeps > budget {
                return Err(Error::NoConvergence {
                    what: "Francis QR",
                    iterations: budget,
                });
            }
            x = h[(nu, nu)];
            y = 0.0;
            w = 0.0;
            if l < nu {
                y = h[(nu - 1, nu - 1)];
                w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            }
            // Exceptional shifts break cycles.
            if iter == 10 {
                exshift += x;
                for i in 0..=nu {
                    h[(i, i)] -= x;
                }
                s = h[(nu, nu - 1)].abs() + h[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in 0..=nu {
                        h[(i, i)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;

            let mut m = nu - 2;
            loop {
                z = h[(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - r - s;
                r = h[(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[(m, m - 1)].abs() * (q.abs() + r.abs())
                    < eps * (p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs()))
                {
                    break;
                }
                m -= 1;
            }

            for i in m + 2..=nu {
                h[(i, i - 2)] = 0.0;
                if i > m + 2 {
                    h[(i, i - 3)] = 0.0;
                }
            }

            for k in m..nu {
                let notlast = k != nu - 1;
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s == 0.0 {
                    continue;
                }
                if k != m {
                    h[(k, k - 1)] = -s * x;
                } else if l != m {
                    h[(k, k - 1)] = -h[(k, k - 1)];
                }
                p += s;
                x = p / s;
                y = q / s;
                z = r / s;
                q /= p;
                r /= p;

                for j in k..nn {
                    p = h[(k, j)] + q * h[(k + 1, j)];
                    if notlast {
                        p += r * h[(k + 2, j)];
                        h[(k + 2, j)] -= p * z;
                    }
                    h[(k, j)] -= p * x;
                    h[(k + 1, j)] -= p * y;
                }
                for i in 0..=nu.min(k + 3) {
                    p = x * h[(i, k)] + y * h[(i, k + 1)];
                    if notlast {
                        p += z * h[(i, k + 2)];
                        h[(i, k + 2)] -= p * r;
                    }
                    h[(i, k)] -= p;
                    h[(i, k + 1)] -= p * q;
                }
                for i in 0..nn {
                    p = x * v[(i, k)] + y * v[(i, k + 1)];
                    if notlast {
                        p += z * v[(i, k + 2)];
                        v[(i, k + 2)] -= p * r;
                    }
                    v[(i, k)] -= p;
                    v[(i, k + 1)] -= p * q;
                }
            }
        }
    }

    if norm == 0.0 {
        return Ok((d, e));
    }

    // Back-substitute for the eigenvectors of the quasi-triangular factor.
    for n in (0..nn).rev() {
        p = d[n];
        q = e[n];
        if q == 0.0 {
            let mut l = n;
            h[(n, n)] = 1.0;
            for i in (0..n).rev() {
                w = h[(i, i)] - p;
                r = 0.0;
                for j in l..=n {
                    r += h[(i, j)] * h[(j, n)];
                }
                if e[i] < 0.0 {
                    z = w;
                    s = r;
                } else {
                    l = i;
                    if e[i] == 0.0 {
                        h[(i, n)] = if w != 0.0 { -r / w } else { -r / (eps * norm) };
                    } else {
                        x = h[(i, i + 1)];
                        y = h[(i + 1, i)];
                        q = (d[i] - p) * (d[i] - p) + e[i] * e[i];
                        let t = (x * s - z * r) / q;
                        h[(i, n)] = t;
                        h[(i + 1, n)] = if x.abs() > z.abs() {
                            (-r - w * t) / x
                        } else {
                            (-s - y * t) / z
                        };
                    }
                    let t = h[(i, n)].abs();
                    if (eps * t) * t > 1.0 {
                        for j in i..=n {
                            h[(j, n)] /= t;
                        }
                    }
                }
            }
        } else if q < 0.0 {
            let mut l = n - 1;
            if h[(n, n - 1)].abs() > h[(n - 1, n)].abs() {
                h[(n - 1, n - 1)] = q / h[(n, n - 1)];
                h[(n - 1, n)] = -(h[(n, n)] - p) / h[(n, n - 1)];
            } else {
                let (cr, ci) = cdiv(0.0, -h[(n - 1, n)], h[(n - 1, n - 1)] - p, q);
                h[(n - 1, n - 1)] = cr;
                h[(n - 1, n)] = ci;
            }
            h[(n, n - 1)] = 0.0;
            h[(n, n)] = 1.0;
            for i in (0..n.saturating_sub(1)).rev() {
                let mut ra = 0.0;
                let mut sa = 0.0;
                for j in l..=n {
                    ra += h[(i, j)] * h[(j, n - 1)];
                    sa += h[(i, j)] * h[(j, n)];
                }
                w = h[(i, i)] - p;
                if e[i] < 0.0 {
                    z = w;
                    r = ra;
                    s = sa;
                } else {
                    l = i;
                    if e[i] == 0.0 {
                        let (cr, ci) = cdiv(-ra, -sa, w, q);
                        h[(i, n - 1)] = cr;
                        h[(i, n)] = ci;
                    } else {
                        x = h[(i, i + 1)];
                        y = h[(i + 1, i)];
                        let mut vr = (d[i] - p) * (d[i] - p) + e[i] * e[i] - q * q;
                        let vi = (d[i] - p) * 2.0 * q;
                        if vr == 0.0 && vi == 0.0 {
                            vr = eps * norm * (w.abs() + q.abs() + x.abs() + y.abs() + z.abs());
                        }
                        let (cr, ci) = cdiv(
                            x * r - z * ra + q * sa,
                            x * s - z * sa - q * ra,
                            vr,
                            vi,
                        );
                        h[(i, n - 1)] = cr;
                        h[(i, n)] = ci;
                        if x.abs() > z.abs() + q.abs() {
                            h[(i + 1, n - 1)] = (-ra - w * h[(i, n - 1)] + q * h[(i, n)]) / x;
                            h[(i + 1, n)] = (-sa - w * h[(i, n)] - q * h[(i, n - 1)]) / x;
                        } else {
                            let (cr, ci) = cdiv(-r - y * h[(i, n - 1)], -s - y * h[(i, n)], z, q);
                            h[(i + 1, n - 1)] = cr;
                            h[(i + 1, n)] = ci;
                        }
                    }
                    let t = h[(i, n - 1)].abs().max(h[(i, n)].abs());
                    if (eps * t) * t > 1.0 {
                        for j in i..=n {
                            h[(j, n - 1)] /= t;
                            h[(j, n)] /= t;
                        }
                    }
                }
            }
        }
    }

    // Back-transform: eigenvectors of the original (balanced) matrix.
    for j in (0..nn).rev() {
        for i in 0..nn {
            let mut acc = 0.0;
            for k in 0..=j {
                acc += v[(i, k)] * h[(k, j)];
            }
            v[(i, j)] = acc;
        }
    }

    Ok((d, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_by_re(spec: &Spectrum) -> Vec<Complex64> {
        let mut ev = spec.eigenvalues.clone();
        ev.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        ev
    }

    #[test]
    fn upper_triangular_two_by_two() {
        let a = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let spec = eigen_decompose(&a).unwrap();
        let idx = spec.eigenvalues.iter().position(|z| (z.re - 2.0).abs() < 1e-14).unwrap();
        let v = &spec.right_vectors[idx];
        assert!((v[0].norm() - 1.0).abs() < 1e-14);
        assert!(v[1].norm() < 1e-14);
        let ev = sorted_by_re(&spec);
        assert!((ev[0].re - 1.0).abs() < 1e-14 && (ev[1].re - 2.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_matrix() {
        let a = DenseMatrix::from_diag(&[3.0, -1.0, 0.0]);
        let spec = eigen_decompose(&a).unwrap();
        let ev = sorted_by_re(&spec);
        for (z, want) in ev.iter().zip([-1.0, 0.0, 3.0]) {
            assert!((z.re - want).abs() < 1e-14 && z.im == 0.0);
        }
        for v in &spec.right_vectors {
            let nonzero = v.iter().filter(|z| z.norm() > 1e-14).count();
            assert_eq!(nonzero, 1);
        }
    }

    #[test]
    fn rotation_has_conjugate_pair() {
        let a = DenseMatrix::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]).unwrap();
        let spec = eigen_decompose(&a).unwrap();
        assert_eq!(spec.len(), 2);
        assert!((spec.eigenvalues[0].im - 1.0).abs() < 1e-14);
        assert_eq!(spec.eigenvalues[1], spec.eigenvalues[0].conj());
        assert!(spec.max_residual(&a) < 1e-14);
    }

    #[test]
    fn one_by_one_and_non_square() {
        let a = DenseMatrix::from_rows(&[vec![-4.5]]).unwrap();
        let spec = eigen_decompose(&a).unwrap();
        assert_eq!(spec.eigenvalues[0].re, -4.5);
        let b = DenseMatrix::zeros(2, 3);
        assert!(matches!(eigen_decompose(&b), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn badly_scaled_matrix_residuals() {
        let a = DenseMatrix::from_rows(&[
            vec![1.0, 1e6, 0.0],
            vec![1e-6, 2.0, 1e4],
            vec![0.0, 1e-4, 3.0],
        ])
        .unwrap();
        let spec = eigen_decompose(&a).unwrap();
        assert!(spec.max_residual(&a) <= TOL_EIG * a.frobenius_norm());
    }
}
