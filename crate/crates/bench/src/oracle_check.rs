//! Cross-validation of the closed-form mixture error against the
//! independent Monte-Carlo estimator on randomized instances.

use kme_core::oracle::{exact_error, mc_error, sample_mixture, GaussianMixture, MixtureComponent};
use kme_core::{KernelSpec, WeightedEmbedding};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::sweep::stable_seed;

#[derive(Clone, Debug)]
pub struct OracleTrial {
    pub dim: usize,
    pub components: usize,
    pub atoms: usize,
    pub exact: f64,
    pub mc_estimate: f64,
    pub mc_std_error: f64,
    pub within_four_se: bool,
}

#[derive(Clone, Debug)]
pub struct OracleCheckReport {
    pub trials: Vec<OracleTrial>,
    pub hits: usize,
}

impl OracleCheckReport {
    /// Agreement target: at least 95% of trials within four standard errors.
    pub fn passed(&self) -> bool {
        let need = (0.95 * self.trials.len() as f64).ceil() as usize;
        self.hits >= need
    }
}

/// Runs `trials` random (mixture, embedding) instances with dimensions
/// cycling through {1, 2, 5}, up to 8 mixture components, up to 50 atoms
/// with random signed weights, and compares the closed-form error against
/// `mc_error` with `samples` Monte-Carlo pairs.
pub fn oracle_check(trials: usize, samples: usize, seed: u64) -> Result<OracleCheckReport> {
    let mut out = Vec::with_capacity(trials);
    let mut hits = 0;
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(stable_seed(seed, t, 7, 0, 0));
        let dim = [1usize, 2, 5][t % 3];
        let p = rng.gen_range(1..=8);

        let mut weights: Vec<f64> = (0..p).map(|_| rng.gen_range(0.2..1.0)).collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let partial: f64 = weights[..p - 1].iter().sum();
        weights[p - 1] = 1.0 - partial;

        let components: Vec<MixtureComponent> = weights
            .into_iter()
            .map(|weight| MixtureComponent {
                weight,
                center: (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect(),
                variances: (0..dim).map(|_| rng.gen_range(0.3..2.0)).collect(),
            })
            .collect();
        let mix = GaussianMixture::new(components)?;

        let kernel = KernelSpec::gaussian(rng.gen_range(0.6..2.0))?;
        let atoms = rng.gen_range(1..=50);
        let landmarks = sample_mixture(&mix, atoms, rng.gen())?;
        let atom_weights: Vec<f64> = (0..atoms).map(|_| rng.gen_range(-0.3..0.6)).collect();
        let embedding = WeightedEmbedding::new(kernel, landmarks, atom_weights)?;

        let exact = exact_error(&mix, &embedding)?;
        let mc = mc_error(&mix, &embedding, samples, rng.gen())?;
        let within = (exact - mc.estimate).abs() <= 4.0 * mc.std_error;
        if within {
            hits += 1;
        }
        out.push(OracleTrial {
            dim,
            components: p,
            atoms,
            exact,
            mc_estimate: mc.estimate,
            mc_std_error: mc.std_error,
            within_four_se: within,
        });
    }
    Ok(OracleCheckReport { trials: out, hits })
}
