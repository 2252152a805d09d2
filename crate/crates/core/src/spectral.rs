//! Empirical effective dimension, high-probability error-bound evaluation,
//! and spectral-decay-based subsample-size planning.

use rand::seq::index::sample as index_sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernels::{gram_self, KernelSpec, PointSet};
use crate::psd_linalg::PsdEigen;

/// Default cap on the number of points used to estimate a spectral profile;
/// larger datasets are subsampled and the profile flagged approximate.
pub const DEFAULT_PROFILE_CAP: usize = 4000;

/// Descending empirical covariance spectrum `sigma_i = eig_i(K_n) / n`
/// together with the kernel's boundedness constant.
#[derive(Clone, Debug)]
pub struct SpectralProfile {
    eigenvalues: Vec<f64>,
    k_bound: f64,
    sample_size: usize,
    approximate: bool,
}

impl SpectralProfile {
    /// Builds a profile from an explicit spectrum (analytic or precomputed).
    /// Eigenvalues must be non-negative with a positive maximum, and their
    /// sum may not exceed `k_bound^2` beyond tolerance (the trace bound).
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>, k_bound: f64) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::EmptyInput("eigenvalues"));
        }
        if !(k_bound.is_finite() && k_bound > 0.0) {
            return Err(Error::invalid("k_bound", "must be a positive finite real"));
        }
        if !eigenvalues.iter().all(|v| v.is_finite() && *v >= 0.0) {
            return Err(Error::invalid(
                "eigenvalues",
                "must be non-negative finite reals",
            ));
        }
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        if eigenvalues[0] <= 0.0 {
            return Err(Error::invalid("eigenvalues", "largest value must be > 0"));
        }
        let trace: f64 = eigenvalues.iter().sum();
        if trace > k_bound * k_bound + 1e-6 {
            return Err(Error::invalid(
                "eigenvalues",
                format!(
                    "sum {trace} exceeds trace bound K^2 = {}",
                    k_bound * k_bound
                ),
            ));
        }
        let sample_size = eigenvalues.len();
        Ok(SpectralProfile {
            eigenvalues,
            k_bound,
            sample_size,
            approximate: false,
        })
    }

    /// Empirical profile `eig(K_n)/n` from data. Sets larger than `cap`
    /// points are uniformly subsampled (seeded) and flagged approximate.
    pub fn from_points(kernel: &KernelSpec, x: &PointSet, cap: usize, seed: u64) -> Result<Self> {
        if cap == 0 {
            return Err(Error::invalid("cap", "must be at least 1"));
        }
        let (points, approximate) = if x.len() > cap {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let idx = index_sample(&mut rng, x.len(), cap).into_vec();
            (x.subset(&idx)?, true)
        } else {
            (x.clone(), false)
        };
        let n = points.len();
        let gram = gram_self(kernel, &points)?;
        let eig = PsdEigen::new(&gram)?;
        let eigenvalues: Vec<f64> = eig.eigenvalues().iter().map(|v| v / n as f64).collect();
        let mut profile = Self::from_eigenvalues(eigenvalues, kernel.boundedness_constant())?;
        profile.sample_size = n;
        profile.approximate = approximate;
        Ok(profile)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn k_bound(&self) -> f64 {
        self.k_bound
    }

    /// Largest eigenvalue; the computable stand-in for the covariance
    /// operator norm.
    pub fn top_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn sample_size(&self) -> usize {
        self.sample_size
    }

    pub fn is_approximate(&self) -> bool {
        self.approximate
    }
}

/// Assumed decay of the effective dimension, with its parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DecayRegime {
    /// `N(lambda) <= c lambda^{-gamma}` with `gamma` in (0, 1].
    Polynomial { gamma: f64, c: f64 },
    /// `N(lambda) <= log(1 + c/lambda) / beta`.
    Logarithmic { beta: f64, c: f64 },
}

impl DecayRegime {
    pub fn polynomial(gamma: f64, c: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::invalid("gamma", "must lie in (0, 1]"));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::invalid("c", "must be a positive finite real"));
        }
        Ok(DecayRegime::Polynomial { gamma, c })
    }

    pub fn logarithmic(beta: f64, c: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::invalid("beta", "must be a positive finite real"));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::invalid("c", "must be a positive finite real"));
        }
        Ok(DecayRegime::Logarithmic { beta, c })
    }
}

/// Effective dimension `N(lambda) = sum_i sigma_i / (sigma_i + lambda)`.
pub fn effective_dimension(profile: &SpectralProfile, lambda: f64) -> Result<f64> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid("lambda", "must be a positive finite real"));
    }
    Ok(profile
        .eigenvalues()
        .iter()
        .map(|&s| s / (s + lambda))
        .sum())
}

/// The computable upper bound `K^2 / lambda` on the supremum variant of the
/// effective dimension (the exact essential supremum is not computable).
pub fn n_infty_upper(k_bound: f64, lambda: f64) -> Result<f64> {
    if !(k_bound.is_finite() && k_bound > 0.0) {
        return Err(Error::invalid("k_bound", "must be a positive finite real"));
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid("lambda", "must be a positive finite real"));
    }
    Ok(k_bound * k_bound / lambda)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta.is_finite() && delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("delta", "must lie in (0, 1)"));
    }
    Ok(())
}

/// Subsample-size admissibility: `m >= max(67, 12 K^2 / c_norm) log(m/delta)`,
/// evaluated directly. Requires `m >= 4`.
pub fn admissible_m(m: usize, delta: f64, k_bound: f64, c_norm: f64) -> Result<bool> {
    if m < 4 {
        return Err(Error::invalid("m", "must be at least 4"));
    }
    check_delta(delta)?;
    if !(k_bound.is_finite() && k_bound > 0.0) {
        return Err(Error::invalid("k_bound", "must be a positive finite real"));
    }
    if !(c_norm.is_finite() && c_norm > 0.0) {
        return Err(Error::invalid("c_norm", "must be a positive finite real"));
    }
    let factor = (12.0 * k_bound * k_bound / c_norm).max(67.0);
    let threshold = factor * (m as f64 / delta).ln();
    Ok(m as f64 >= threshold)
}

/// High-probability bound on the Nyström approximation error:
/// `c1/sqrt(n) + c2/m + c3 sqrt(log(m/delta))/m * sqrt(N(12 K^2 log(m/delta)/m))`
/// with `c1 = 2K sqrt(2 log(6/delta))`, `c2 = 4 sqrt(3) K log(12/delta)`,
/// `c3 = 12 sqrt(3 log(12/delta)) K`.
///
/// Fails with a precondition error when `(n, m, delta)` is inadmissible; the
/// covariance norm is taken as the profile's top eigenvalue.
pub fn theorem_bound(n: usize, m: usize, delta: f64, profile: &SpectralProfile) -> Result<f64> {
    check_delta(delta)?;
    if m < 4 {
        return Err(Error::Precondition(format!("m = {m} violates m >= 4")));
    }
    if m > n {
        return Err(Error::Precondition(format!("m = {m} exceeds n = {n}")));
    }
    let k = profile.k_bound();
    let c_norm = profile.top_eigenvalue();
    if !admissible_m(m, delta, k, c_norm)? {
        let factor = (12.0 * k * k / c_norm).max(67.0);
        return Err(Error::Precondition(format!(
            "m = {m} violates m >= max(67, 12K^2/||C||) log(m/delta) = {:.3}",
            factor * (m as f64 / delta).ln()
        )));
    }

    let log_m_delta = (m as f64 / delta).ln();
    let c1 = 2.0 * k * (2.0 * (6.0 / delta).ln()).sqrt();
    let c2 = 4.0 * 3.0f64.sqrt() * k * (12.0 / delta).ln();
    let c3 = 12.0 * (3.0 * (12.0 / delta).ln()).sqrt() * k;
    let lambda = 12.0 * k * k * log_m_delta / m as f64;
    let eff = effective_dimension(profile, lambda)?;
    Ok(c1 / (n as f64).sqrt() + c2 / m as f64 + c3 * log_m_delta.sqrt() / m as f64 * eff.sqrt())
}

/// Unclamped subsample-size rule for the given decay regime (before the
/// ceiling): `n^{1/(2-gamma)} log(n/delta)` for polynomial decay,
/// `sqrt(n) log(sqrt(n) max(1/delta, c/(6 K^2)))` for logarithmic decay.
pub fn plan_subsample_size_raw(
    n: usize,
    delta: f64,
    regime: &DecayRegime,
    k_bound: f64,
) -> Result<f64> {
    if n < 4 {
        return Err(Error::invalid("n", "must be at least 4"));
    }
    check_delta(delta)?;
    if !(k_bound.is_finite() && k_bound > 0.0) {
        return Err(Error::invalid("k_bound", "must be a positive finite real"));
    }
    let nf = n as f64;
    Ok(match *regime {
        DecayRegime::Polynomial { gamma, .. } => nf.powf(1.0 / (2.0 - gamma)) * (nf / delta).ln(),
        DecayRegime::Logarithmic { c, .. } => {
            let root = nf.sqrt();
            root * (root * (1.0 / delta).max(c / (6.0 * k_bound * k_bound))).ln()
        }
    })
}

/// Planned subsample size for the decay regime, clamped to `[4, n]`.
pub fn plan_subsample_size(
    n: usize,
    delta: f64,
    regime: &DecayRegime,
    k_bound: f64,
) -> Result<usize> {
    let raw = plan_subsample_size_raw(n, delta, regime, k_bound)?;
    let m = raw.ceil() as usize;
    Ok(m.clamp(4, n))
}
