//! Planted low-rank ground truths, noise specifications and observation models.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::truncated_svd;
use crate::matrix::{axpy, dot, norm2, DenseMatrix};

/// The generator behind every seeded draw in this crate.
pub type TrialRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Per-trial seed; depends only on the base seed and the trial index.
#[inline]
pub fn trial_seed(base_seed: u64, trial: u64) -> u64 {
    base_seed ^ trial
}

/// How the eigenvectors of a [`GroundTruth`] are generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Basis {
    /// `u₁ = 1/√n`, `u₂ = [1; −1]/√n` (rank 2, even n).
    CannedRank2,
    /// Q factor of a seeded Gaussian n×r matrix.
    RandomOrthonormal { seed: u64 },
    /// Random orthonormal basis whose columns have prescribed inner products
    /// with the normalized all-ones direction.
    Aligned { targets: Vec<f64>, seed: u64 },
}

/// `M* = U* diag(λ*) U*ᵀ` with derived condition number, incoherence and gaps.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub n: usize,
    pub eigenvalues: Vec<f64>,
    /// n × r with orthonormal columns.
    pub basis: DenseMatrix,
    pub kappa: f64,
    pub mu: f64,
    /// `Δ*_l = min_{k≠l} |λ*_l − λ*_k|`; infinite when r = 1.
    pub gaps: Vec<f64>,
}

impl GroundTruth {
    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvector `l` (1-based).
    pub fn eigenvector(&self, l: usize) -> Vec<f64> {
        self.basis.column(l - 1)
    }

    pub fn eigenvalue(&self, l: usize) -> f64 {
        self.eigenvalues[l - 1]
    }

    pub fn gap(&self, l: usize) -> f64 {
        self.gaps[l - 1]
    }

    pub fn matrix(&self) -> DenseMatrix {
        let mut us = self.basis.clone();
        for i in 0..self.n {
            for (x, &lambda) in us.row_mut(i).iter_mut().zip(&self.eigenvalues) {
                *x *= lambda;
            }
        }
        us.matmul(&self.basis.transpose())
    }
}

pub fn build_ground_truth(n: usize, eigenvalues: &[f64], basis: &Basis) -> Result<GroundTruth> {
    let r = eigenvalues.len();
    if r == 0 || r > n {
        return Err(Error::RankOutOfRange { r, max: n });
    }
    if eigenvalues.iter().any(|&x| x == 0.0 || !x.is_finite()) {
        return Err(Error::InvalidParameter("eigenvalues must be finite and nonzero".into()));
    }
    let sorted = eigenvalues
        .windows(2)
        .all(|w| w[0] >= w[1] && w[0].abs() >= w[1].abs());
    if !sorted {
        return Err(Error::InvalidParameter(
            "eigenvalues must be descending in value and in magnitude".into(),
        ));
    }

    let u = match basis {
        Basis::CannedRank2 => {
            if r != 2 || !n.is_multiple_of(2) {
                return Err(Error::InvalidParameter(
                    "canned basis needs rank 2 and even n".into(),
                ));
            }
            let s = 1.0 / (n as f64).sqrt();
            DenseMatrix::from_fn(n, 2, |i, j| if j == 1 && i >= n / 2 { -s } else { s })
        }
        Basis::RandomOrthonormal { seed } => random_orthonormal_basis(n, r, *seed),
        Basis::Aligned { targets, seed } => aligned_basis(n, targets, *seed)?,
    };
    if u.cols() != r {
        return Err(Error::Shape(format!("basis has {} columns for rank {r}", u.cols())));
    }

    let abs_max = eigenvalues[0].abs();
    let abs_min = eigenvalues[r - 1].abs();
    let gaps = (0..r)
        .map(|l| {
            (0..r)
                .filter(|&k| k != l)
                .map(|k| (eigenvalues[l] - eigenvalues[k]).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Ok(GroundTruth {
        n,
        eigenvalues: eigenvalues.to_vec(),
        mu: incoherence_mu(&u),
        basis: u,
        kappa: abs_max / abs_min,
        gaps,
    })
}

fn random_orthonormal_basis(n: usize, r: usize, seed: u64) -> DenseMatrix {
    let mut rng = rng_from_seed(seed);
    let g = DenseMatrix::from_fn(n, r, |_, _| StandardNormal.sample(&mut rng));
    householder_q(&g)
}

/// Thin Q factor of a full-column-rank matrix via Householder reflections.
fn householder_q(a: &DenseMatrix) -> DenseMatrix {
    let (n, r) = (a.rows(), a.cols());
    let mut work = a.clone();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(r);
    for j in 0..r {
        let mut v: Vec<f64> = (j..n).map(|i| work[(i, j)]).collect();
        let alpha = -v[0].signum() * norm2(&v);
        v[0] -= alpha;
        let vn = norm2(&v);
        if vn > 0.0 {
            v.iter_mut().for_each(|x| *x /= vn);
        }
        for c in j..r {
            let s: f64 = (j..n).map(|i| v[i - j] * work[(i, c)]).sum();
            for i in j..n {
                work[(i, c)] -= 2.0 * s * v[i - j];
            }
        }
        reflectors.push(v);
    }
    let mut q = DenseMatrix::from_fn(n, r, |i, j| if i == j { 1.0 } else { 0.0 });
    for (j, v) in reflectors.iter().enumerate().rev() {
        for c in 0..r {
            let s: f64 = (j..n).map(|i| v[i - j] * q[(i, c)]).sum();
            for i in j..n {
                q[(i, c)] -= 2.0 * s * v[i - j];
            }
        }
    }
    q
}

/// `U = a₀ tᵀ + Q (I − t tᵀ)^{1/2}` with `Q ⊥ a₀`, so that `Uᵀa₀ = t` and
/// `UᵀU = I`.
fn aligned_basis(n: usize, targets: &[f64], seed: u64) -> Result<DenseMatrix> {
    let r = targets.len();
    let t2: f64 = targets.iter().map(|t| t * t).sum();
    if t2 > 1.0 + 1e-12 || r + 1 > n {
        return Err(Error::InfeasibleTargets(t2));
    }
    let a0 = vec![1.0 / (n as f64).sqrt(); n];
    let mut rng = rng_from_seed(seed);
    let mut g = DenseMatrix::from_fn(n, r + 1, |_, _| StandardNormal.sample(&mut rng));
    g.set_column(0, &a0);
    let full = householder_q(&g);
    let q = DenseMatrix::from_fn(n, r, |i, j| full[(i, j + 1)]);

    // S = I + (√(1 − ‖t‖²) − 1) t tᵀ / ‖t‖², the PSD square root of I − t tᵀ.
    let c = if t2 > 0.0 {
        ((1.0 - t2).max(0.0).sqrt() - 1.0) / t2
    } else {
        0.0
    };
    let s = DenseMatrix::from_fn(r, r, |i, j| {
        f64::from(u8::from(i == j)) + c * targets[i] * targets[j]
    });
    let qs = q.matmul(&s);
    Ok(DenseMatrix::from_fn(n, r, |i, j| a0[i] * targets[j] + qs[(i, j)]))
}

/// Minimal μ such that `‖U‖∞ ≤ √(μ/n)`, i.e. `n · max |U_ij|²`.
pub fn incoherence_mu(u: &DenseMatrix) -> f64 {
    u.rows() as f64 * u.max_abs().powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseFamily {
    #[default]
    Gaussian,
    /// `±σ_ij` with equal probability.
    Rademacher,
    None,
}

/// Entrywise standard deviations and the distribution family they scale.
#[derive(Debug, Clone)]
pub struct NoiseSpec {
    pub family: NoiseFamily,
    pub sigma: DenseMatrix,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// Almost-sure magnitude bound where one exists (diagnostics only).
    pub bound: Option<f64>,
}

impl NoiseSpec {
    pub fn new(family: NoiseFamily, sigma: DenseMatrix) -> Result<Self> {
        if !sigma.is_square() {
            return Err(Error::NotSquare {
                rows: sigma.rows(),
                cols: sigma.cols(),
            });
        }
        if sigma.as_slice().iter().any(|&s| !(s >= 0.0) || !s.is_finite()) {
            return Err(Error::InvalidParameter(
                "standard deviations must be finite and nonnegative".into(),
            ));
        }
        let sigma_min = sigma.as_slice().iter().copied().fold(f64::INFINITY, f64::min);
        let sigma_max = sigma.as_slice().iter().copied().fold(0.0, f64::max);
        let bound = match family {
            NoiseFamily::Gaussian => None,
            NoiseFamily::Rademacher => Some(sigma_max),
            NoiseFamily::None => Some(0.0),
        };
        Ok(NoiseSpec {
            family,
            sigma,
            sigma_min,
            sigma_max,
            bound,
        })
    }

    pub fn homoscedastic(n: usize, sigma: f64, family: NoiseFamily) -> Result<Self> {
        Self::new(family, DenseMatrix::from_fn(n, n, |_, _| sigma))
    }

    pub fn none(n: usize) -> Self {
        Self::new(NoiseFamily::None, DenseMatrix::zeros(n, n)).expect("zero spec is valid")
    }

    pub fn with_family(self, family: NoiseFamily) -> Self {
        Self::new(family, self.sigma).expect("sigma already validated")
    }

    pub fn n(&self) -> usize {
        self.sigma.rows()
    }

    /// Standard deviations as the model sees them; `None` has zero noise.
    pub fn effective_sigma(&self, i: usize, j: usize) -> f64 {
        match self.family {
            NoiseFamily::None => 0.0,
            _ => self.sigma[(i, j)],
        }
    }
}

/// Row-constant ladder `σ_ij = σ₁ + (i − 1) δσ`.
pub fn variance_ladder(n: usize, sigma1: f64, delta_sigma: f64) -> Result<NoiseSpec> {
    if !(sigma1 > 0.0) || !(delta_sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "ladder needs sigma1 > 0 and delta >= 0 (got {sigma1}, {delta_sigma})"
        )));
    }
    NoiseSpec::new(
        NoiseFamily::Gaussian,
        DenseMatrix::from_fn(n, n, |i, _| sigma1 + i as f64 * delta_sigma),
    )
}

/// `Var = σ₁² [J_{n/2} − ½I, 0; 0, 0] + σ₂² (J_n − ½I)`.
pub fn variance_blocks(n: usize, sigma1: f64, sigma2: f64) -> Result<NoiseSpec> {
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidParameter("block variance needs even n".into()));
    }
    if !(sigma1 >= 0.0) || !(sigma2 >= 0.0) {
        return Err(Error::InvalidParameter("block sigmas must be nonnegative".into()));
    }
    let half = n / 2;
    let mut var = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let diag = if i == j { 0.5 } else { 0.0 };
            let mut v = sigma2 * sigma2 * (1.0 - diag);
            if i < half && j < half {
                v += sigma1 * sigma1 * (1.0 - diag);
            }
            if v < 0.0 {
                return Err(Error::InvalidParameter(format!("negative variance at ({i},{j})")));
            }
            var[(i, j)] = v;
        }
    }
    let sigma = DenseMatrix::from_fn(n, n, |i, j| var[(i, j)].sqrt());
    NoiseSpec::new(NoiseFamily::Gaussian, sigma)
}

/// Independent zero-mean entries with standard deviations `spec.sigma`.
pub fn sample_noise(spec: &NoiseSpec, seed: u64) -> DenseMatrix {
    sample_noise_with(spec, &mut rng_from_seed(seed))
}

pub fn sample_noise_with<R: Rng + ?Sized>(spec: &NoiseSpec, rng: &mut R) -> DenseMatrix {
    let n = spec.n();
    match spec.family {
        NoiseFamily::None => DenseMatrix::zeros(n, n),
        NoiseFamily::Gaussian => {
            let mut h = spec.sigma.clone();
            for x in h.as_mut_slice() {
                let z: f64 = StandardNormal.sample(rng);
                *x *= z;
            }
            h
        }
        NoiseFamily::Rademacher => {
            let mut h = spec.sigma.clone();
            for x in h.as_mut_slice() {
                if rng.random::<bool>() {
                    *x = -*x;
                }
            }
            h
        }
    }
}

/// Skew-symmetric Gaussian matrix: `H_ij = −H_ji ~ N(0, σ²)` for `i < j`, zero diagonal.
pub fn skew_symmetric_noise<R: Rng + ?Sized>(n: usize, sigma: f64, rng: &mut R) -> DenseMatrix {
    let mut h = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let z: f64 = StandardNormal.sample(rng);
            h[(i, j)] = sigma * z;
            h[(j, i)] = -sigma * z;
        }
    }
    h
}

/// Symmetric Gaussian matrix: `H_ij = H_ji ~ N(0, σ²)` for `i ≤ j`.
pub fn symmetric_gaussian_noise<R: Rng + ?Sized>(n: usize, sigma: f64, rng: &mut R) -> DenseMatrix {
    let mut h = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let z: f64 = StandardNormal.sample(rng);
            h[(i, j)] = sigma * z;
            h[(j, i)] = sigma * z;
        }
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ObservationKind {
    Full,
    /// Each entry observed independently with probability `p`, rescaled by `1/p`.
    Missing { p: f64 },
    /// `½(M + Mᵀ)` of the full observation.
    Symmetrized,
    /// Full observation plus an independent skew-symmetric Gaussian matrix.
    SkewInjected { sigma: f64 },
}

#[derive(Debug, Clone)]
pub struct ObservationModel {
    pub kind: ObservationKind,
    pub truth: GroundTruth,
    pub noise: NoiseSpec,
}

impl ObservationModel {
    pub fn new(kind: ObservationKind, truth: GroundTruth, noise: NoiseSpec) -> Result<Self> {
        if noise.n() != truth.n {
            return Err(Error::Shape(format!(
                "noise is {0}x{0} but truth has n = {1}",
                noise.n(),
                truth.n
            )));
        }
        match kind {
            ObservationKind::Missing { p } if !(p > 0.0 && p <= 1.0) => {
                return Err(Error::InvalidParameter(format!("sampling rate {p} not in (0, 1]")));
            }
            ObservationKind::SkewInjected { sigma } if !(sigma >= 0.0) => {
                return Err(Error::InvalidParameter("skew sigma must be nonnegative".into()));
            }
            _ => {}
        }
        Ok(ObservationModel { kind, truth, noise })
    }
}

pub fn observe(model: &ObservationModel, seed: u64) -> DenseMatrix {
    observe_with(model, &mut rng_from_seed(seed))
}

/// Draws one observation. The noise matrix is always drawn first, so a full
/// observation minus `M*` reproduces [`sample_noise`] for the same seed.
pub fn observe_with<R: Rng + ?Sized>(model: &ObservationModel, rng: &mut R) -> DenseMatrix {
    let m_star = model.truth.matrix();
    let h = sample_noise_with(&model.noise, rng);
    match model.kind {
        ObservationKind::Full => m_star.add(&h),
        ObservationKind::Missing { p } => {
            let sp = p.sqrt();
            let mut m = DenseMatrix::zeros(m_star.rows(), m_star.cols());
            for ((out, &ms), &hij) in m.as_mut_slice().iter_mut().zip(m_star.as_slice()).zip(h.as_slice()) {
                let keep = rng.random::<f64>() < p;
                if keep {
                    *out = (ms + sp * hij) / p;
                }
            }
            m
        }
        ObservationKind::Symmetrized => {
            let full = m_star.add(&h);
            full.add(&full.transpose()).scale(0.5)
        }
        ObservationKind::SkewInjected { sigma } => {
            let full = m_star.add(&h);
            full.add(&skew_symmetric_noise(full.rows(), sigma, rng))
        }
    }
}

/// Unit vector `a` with `aᵀu*_k = targets[k]` and a seeded random remainder
/// orthogonal to the truth's column space.
pub fn direction_with_alignment(truth: &GroundTruth, targets: &[f64], seed: u64) -> Result<Vec<f64>> {
    let r = truth.rank();
    if targets.len() != r {
        return Err(Error::Shape(format!("{} targets for rank {r}", targets.len())));
    }
    let t2: f64 = targets.iter().map(|t| t * t).sum();
    if t2 > 1.0 + 1e-12 {
        return Err(Error::InfeasibleTargets(t2));
    }
    let n = truth.n;
    let mut a = truth.basis.matvec(targets);
    let rest = (1.0 - t2).max(0.0).sqrt();
    if rest > 0.0 {
        if r >= n {
            return Err(Error::InfeasibleTargets(t2));
        }
        let mut rng = rng_from_seed(seed);
        let cols: Vec<Vec<f64>> = (0..r).map(|k| truth.basis.column(k)).collect();
        let mut z: Vec<f64>;
        loop {
            z = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            for _ in 0..2 {
                for c in &cols {
                    let proj = dot(c, &z);
                    axpy(-proj, c, &mut z);
                }
            }
            let nz = norm2(&z);
            if nz > 1e-8 {
                z.iter_mut().for_each(|x| *x /= nz);
                break;
            }
        }
        axpy(rest, &z, &mut a);
    }
    let na = norm2(&a);
    if na > 0.0 && (na - 1.0).abs() > 1e-12 {
        a.iter_mut().for_each(|x| *x /= na);
    }
    Ok(a)
}

/// Largest singular value, used for the Neumann-series precondition.
pub fn spectral_norm(h: &DenseMatrix) -> Result<f64> {
    Ok(truncated_svd(h, 1)?.s[0])
}
