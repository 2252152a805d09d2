//! Exact RKHS error evaluation for Gaussian mixtures under the Gaussian
//! kernel, plus an independent Monte-Carlo estimator for cross-validation.
//!
//! For a mixture with diagonal covariances the two integrals in the error
//! decomposition have closed forms:
//!
//! ```text
//! E_{x ~ N(mu, G)} k(x, y)  = prod_k tau/sqrt(g_k + tau^2) * exp(-(y_k - mu_k)^2 / (2 (g_k + tau^2)))
//! E E k(x, x')              = prod_k tau/sqrt(g_k + g'_k + tau^2) * exp(-(mu'_k - mu_k)^2 / (2 (g_k + g'_k + tau^2)))
//! ```
//!
//! Each product is evaluated in log space so high-dimensional factors do not
//! underflow prematurely.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::embedding::{rkhs_norm_sq, WeightedEmbedding};
use crate::error::{Error, Result};
use crate::kernels::{KernelSpec, PointSet};

/// One mixture component: weight, center, and diagonal covariance.
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub center: Vec<f64>,
    pub variances: Vec<f64>,
}

/// A Gaussian mixture with diagonal covariances; weights sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianMixture {
    dim: usize,
    components: Vec<MixtureComponent>,
}

impl GaussianMixture {
    pub fn new(components: Vec<MixtureComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptyInput("mixture components"));
        }
        let dim = components[0].center.len();
        if dim == 0 {
            return Err(Error::invalid("center", "dimension must be at least 1"));
        }
        let mut total = 0.0;
        for c in &components {
            if c.center.len() != dim || c.variances.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: c.center.len().max(c.variances.len()),
                });
            }
            if !c.center.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite("component center"));
            }
            if !c.variances.iter().all(|v| v.is_finite() && *v > 0.0) {
                return Err(Error::invalid(
                    "variances",
                    "all covariance diagonals must be positive",
                ));
            }
            if !(c.weight.is_finite() && c.weight > 0.0) {
                return Err(Error::invalid("weight", "must be a positive finite real"));
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(
                "weights",
                format!("must sum to 1 within 1e-12, got {total}"),
            ));
        }
        Ok(GaussianMixture { dim, components })
    }

    /// Equal-weight mixture with identity covariances at the given centers.
    pub fn uniform_isotropic(centers: Vec<Vec<f64>>) -> Result<Self> {
        let p = centers.len();
        if p == 0 {
            return Err(Error::EmptyInput("mixture centers"));
        }
        let d = centers[0].len();
        let w = 1.0 / p as f64;
        // Equal weights that sum to exactly 1: distribute the rounding
        // remainder on the last component.
        let mut weights = vec![w; p];
        let sum: f64 = weights.iter().sum();
        weights[p - 1] += 1.0 - sum;
        let components = centers
            .into_iter()
            .zip(weights)
            .map(|(center, weight)| MixtureComponent {
                weight,
                center,
                variances: vec![1.0; d],
            })
            .collect();
        Self::new(components)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::invalid("tau", "must be a positive finite real"));
    }
    Ok(())
}

/// Log of `prod_k tau/sqrt(s_k) * exp(-(a_k - b_k)^2 / (2 s_k))` where
/// `s_k = vars_k + tau^2`.
fn log_gauss_factor(tau: f64, a: &[f64], b: &[f64], vars: impl Iterator<Item = f64>) -> f64 {
    let log_tau = tau.ln();
    let tau2 = tau * tau;
    a.iter()
        .zip(b)
        .zip(vars)
        .map(|((&ak, &bk), vk)| {
            let s = vk + tau2;
            log_tau - 0.5 * s.ln() - (ak - bk) * (ak - bk) / (2.0 * s)
        })
        .sum()
}

/// Kernel mean embedding of the mixture evaluated at a point:
/// `E_{x ~ rho} k(x, point)` for the Gaussian kernel with bandwidth `tau`.
pub fn kme_at_point(mix: &GaussianMixture, tau: f64, point: &[f64]) -> Result<f64> {
    check_tau(tau)?;
    if point.len() != mix.dim() {
        return Err(Error::DimensionMismatch {
            left: mix.dim(),
            right: point.len(),
        });
    }
    if !point.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("evaluation point"));
    }
    Ok(mix
        .components()
        .iter()
        .map(|c| {
            c.weight * log_gauss_factor(tau, point, &c.center, c.variances.iter().copied()).exp()
        })
        .sum())
}

/// Squared RKHS norm of the mixture's embedding:
/// the double integral of the kernel against the mixture.
pub fn kme_norm_sq(mix: &GaussianMixture, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    let mut acc = 0.0;
    for ci in mix.components() {
        for cj in mix.components() {
            let vars = ci.variances.iter().zip(&cj.variances).map(|(a, b)| a + b);
            acc +=
                ci.weight * cj.weight * log_gauss_factor(tau, &cj.center, &ci.center, vars).exp();
        }
    }
    Ok(acc)
}

fn gaussian_bandwidth(e: &WeightedEmbedding) -> Result<f64> {
    match *e.kernel() {
        KernelSpec::Gaussian { bandwidth } => Ok(bandwidth),
        KernelSpec::Laplacian { .. } => Err(Error::UnsupportedKernel(
            "exact mixture error requires the gaussian kernel, got laplacian",
        )),
        KernelSpec::Polynomial { .. } => Err(Error::UnsupportedKernel(
            "exact mixture error requires the gaussian kernel, got polynomial",
        )),
    }
}

/// Exact RKHS distance between the mixture's true embedding and a weighted
/// embedding: `sqrt(E E k + alpha^T K alpha - 2 sum_j alpha_j E k(., y_j))`,
/// with negative round-off clamped at zero.
pub fn exact_error(mix: &GaussianMixture, e: &WeightedEmbedding) -> Result<f64> {
    let tau = gaussian_bandwidth(e)?;
    if e.num_atoms() > 0 && e.dim() != mix.dim() {
        return Err(Error::DimensionMismatch {
            left: mix.dim(),
            right: e.dim(),
        });
    }
    let mut cross = 0.0;
    for (j, &w) in e.weights().iter().enumerate() {
        cross += w * kme_at_point(mix, tau, e.landmarks().point(j))?;
    }
    let sq = kme_norm_sq(mix, tau)? + rkhs_norm_sq(e) - 2.0 * cross;
    Ok(sq.max(0.0).sqrt())
}

/// Monte-Carlo estimate of [`exact_error`] with a delta-method standard
/// error on the root.
#[derive(Clone, Copy, Debug)]
pub struct McErrorEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// Estimates the squared-error decomposition by replacing both mixture
/// integrals with Monte-Carlo averages over `samples` fresh pairs drawn from
/// the mixture. Deterministic for a fixed seed.
pub fn mc_error(
    mix: &GaussianMixture,
    e: &WeightedEmbedding,
    samples: usize,
    seed: u64,
) -> Result<McErrorEstimate> {
    if samples < 1000 {
        return Err(Error::invalid("samples", "must be at least 1000"));
    }
    gaussian_bandwidth(e)?;
    if e.num_atoms() > 0 && e.dim() != mix.dim() {
        return Err(Error::DimensionMismatch {
            left: mix.dim(),
            right: e.dim(),
        });
    }
    let kernel = e.kernel();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = mix.dim();
    let mut x = vec![0.0f64; d];
    let mut y = vec![0.0f64; d];

    // Per-pair statistic Z_i = k(x, x') - sum_j a_j [k(x, y_j) + k(x', y_j)]
    // with E[Z] = E E k - 2 sum_j a_j E k(., y_j). Welford keeps the
    // variance for the delta-method standard error.
    let mut mean = 0.0f64;
    let mut m2 = 0.0f64;
    for i in 0..samples {
        draw_from(mix, &mut rng, &mut x);
        draw_from(mix, &mut rng, &mut y);
        let mut z = kernel.eval_unchecked(&x, &y);
        for (j, &w) in e.weights().iter().enumerate() {
            let lj = e.landmarks().point(j);
            z -= w * (kernel.eval_unchecked(&x, lj) + kernel.eval_unchecked(&y, lj));
        }
        let delta = z - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (z - mean);
    }
    let var = m2 / (samples as f64 - 1.0);
    let se_sq = (var / samples as f64).sqrt();

    let sq = mean + rkhs_norm_sq(e);
    let estimate = sq.max(0.0).sqrt();
    // Near zero the delta method degenerates; fall back to the conservative
    // root of the squared-scale standard error.
    let std_error = if sq > 2.0 * se_sq {
        se_sq / (2.0 * sq.sqrt())
    } else {
        se_sq.sqrt()
    };
    Ok(McErrorEstimate {
        estimate,
        std_error,
    })
}

fn draw_from(mix: &GaussianMixture, rng: &mut ChaCha8Rng, out: &mut [f64]) {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut chosen = mix.components().len() - 1;
    for (idx, c) in mix.components().iter().enumerate() {
        acc += c.weight;
        if u < acc {
            chosen = idx;
            break;
        }
    }
    let c = &mix.components()[chosen];
    for (k, o) in out.iter_mut().enumerate() {
        let z: f64 = StandardNormal.sample(rng);
        *o = c.center[k] + c.variances[k].sqrt() * z;
    }
}

/// Draws `n` i.i.d. points from the mixture, deterministically per seed.
pub fn sample_mixture(mix: &GaussianMixture, n: usize, seed: u64) -> Result<PointSet> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = mix.dim();
    let mut data = vec![0.0f64; n * d];
    for i in 0..n {
        let row = &mut data[i * d..(i + 1) * d];
        draw_from(mix, &mut rng, row);
    }
    PointSet::from_flat(n, d, data)
}
