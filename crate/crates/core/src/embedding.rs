//! Weighted RKHS embeddings: empirical, uniform-landmark, Nyström, and
//! herding estimators, plus inner products, distances, and quadrature.
//!
//! An embedding is a finite expansion `sum_j alpha_j phi(y_j)`. The Nyström
//! estimator projects the empirical embedding onto the span of the landmark
//! features; its weights are `(1/n) pinv(K_m) K_mn 1_n`, with `K_mn 1_n`
//! accumulated in column blocks so the cross Gram matrix is never stored.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernels::{gram_self, KernelSpec, PointSet};
use crate::psd_linalg::PsdEigen;

/// Column block size for the streamed `K_mn 1_n` accumulation.
pub const DEFAULT_BLOCK_COLS: usize = 4096;

static NEGATIVE_SQ_CLAMPS: AtomicU64 = AtomicU64::new(0);

/// Number of times a squared RKHS distance came out negative from
/// floating-point cancellation and was clamped to zero (process-wide).
pub fn negative_distance_clamps() -> u64 {
    NEGATIVE_SQ_CLAMPS.load(Ordering::Relaxed)
}

/// An element `sum_j weights[j] phi(landmarks[j])` of the RKHS of `kernel`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedEmbedding {
    kernel: KernelSpec,
    landmarks: PointSet,
    weights: Vec<f64>,
}

impl WeightedEmbedding {
    pub fn new(kernel: KernelSpec, landmarks: PointSet, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != landmarks.len() {
            return Err(Error::SizeMismatch {
                expected: landmarks.len(),
                got: weights.len(),
            });
        }
        if !weights.iter().all(|w| w.is_finite()) {
            return Err(Error::NonFinite("embedding weights"));
        }
        kernel.check_domain(&landmarks)?;
        Ok(WeightedEmbedding {
            kernel,
            landmarks,
            weights,
        })
    }

    /// The zero element of the RKHS (no atoms). Useful as the `alpha = 0`
    /// convention in error decompositions.
    pub fn zero(kernel: KernelSpec, dim: usize) -> Self {
        WeightedEmbedding {
            kernel,
            landmarks: PointSet::empty(dim),
            weights: Vec::new(),
        }
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn landmarks(&self) -> &PointSet {
        &self.landmarks
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn num_atoms(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.landmarks.dim()
    }

    /// Single-atom embedding `phi(x)`.
    pub fn atom(kernel: KernelSpec, x: &[f64]) -> Result<Self> {
        let landmarks = PointSet::from_flat(1, x.len(), x.to_vec())?;
        WeightedEmbedding::new(kernel, landmarks, vec![1.0])
    }
}

/// Indices of landmarks drawn i.i.d. uniformly with replacement from a
/// dataset, reproducible from `seed`. Indices are 0-based.
#[derive(Clone, Debug, PartialEq)]
pub struct LandmarkDraw {
    indices: Vec<usize>,
    seed: u64,
}

impl LandmarkDraw {
    /// Wraps explicit indices (0-based); used by tests and by callers that
    /// need a non-random draw.
    pub fn from_indices(indices: Vec<usize>, seed: u64) -> Self {
        LandmarkDraw { indices, seed }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// The empirical embedding `(1/n) sum_i phi(X_i)`.
pub fn empirical_embedding(x: &PointSet, kernel: &KernelSpec) -> Result<WeightedEmbedding> {
    let n = x.len();
    let w = 1.0 / n as f64;
    WeightedEmbedding::new(kernel.clone(), x.clone(), vec![w; n])
}

/// Draws `m` i.i.d. uniform indices in `[0, n)` with replacement.
pub fn sample_landmarks(n: usize, m: usize, seed: u64) -> Result<LandmarkDraw> {
    if n == 0 {
        return Err(Error::EmptyInput("dataset"));
    }
    if m == 0 {
        return Err(Error::invalid("m", "must be at least 1"));
    }
    if m > n {
        return Err(Error::invalid(
            "m",
            format!("subsample size {m} exceeds dataset size {n}"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices = (0..m).map(|_| rng.gen_range(0..n)).collect();
    Ok(LandmarkDraw { indices, seed })
}

fn validate_draw(x: &PointSet, draw: &LandmarkDraw) -> Result<()> {
    if draw.is_empty() {
        return Err(Error::EmptyInput("landmark draw"));
    }
    if let Some(&bad) = draw.indices().iter().find(|&&i| i >= x.len()) {
        return Err(Error::invalid(
            "draw",
            format!("index {bad} out of range for {} points", x.len()),
        ));
    }
    Ok(())
}

/// Nyström embedding: the orthogonal projection of the empirical embedding
/// of `x` onto the span of the drawn landmark features, with minimum-norm
/// weights `(1/n) pinv(K_m) K_mn 1_n`.
pub fn nystrom_embedding(
    x: &PointSet,
    draw: &LandmarkDraw,
    kernel: &KernelSpec,
    rel_tol: f64,
) -> Result<WeightedEmbedding> {
    nystrom_embedding_blocked(x, draw, kernel, rel_tol, DEFAULT_BLOCK_COLS)
}

/// [`nystrom_embedding`] with an explicit column block size for the
/// streamed `K_mn 1_n` accumulation.
pub fn nystrom_embedding_blocked(
    x: &PointSet,
    draw: &LandmarkDraw,
    kernel: &KernelSpec,
    rel_tol: f64,
    block_cols: usize,
) -> Result<WeightedEmbedding> {
    validate_draw(x, draw)?;
    if block_cols == 0 {
        return Err(Error::invalid("block_cols", "must be at least 1"));
    }
    let landmarks = x.subset(draw.indices())?;
    kernel.check_domain(x)?;
    let m = landmarks.len();
    let n = x.len();

    let k_m = gram_self(kernel, &landmarks)?;

    // v = K_mn 1_n, accumulated block by block in a fixed order.
    let mut v = vec![0.0f64; m];
    let mut start = 0;
    while start < n {
        let end = (start + block_cols).min(n);
        for (i, vi) in v.iter_mut().enumerate() {
            let li = landmarks.point(i);
            let mut acc = 0.0;
            for j in start..end {
                acc += kernel.eval_unchecked(li, x.point(j));
            }
            *vi += acc;
        }
        start = end;
    }

    let eig = PsdEigen::new(&k_m)?;
    let mut weights = eig.apply_pinv(rel_tol, &v)?;
    let inv_n = 1.0 / n as f64;
    weights.iter_mut().for_each(|w| *w *= inv_n);
    WeightedEmbedding::new(kernel.clone(), landmarks, weights)
}

/// Uniform-weight embedding `(1/m) sum_j phi(X_draw[j])` on the drawn
/// landmarks; an unbiased estimate of the empirical embedding.
pub fn uniform_landmark_embedding(
    x: &PointSet,
    draw: &LandmarkDraw,
    kernel: &KernelSpec,
) -> Result<WeightedEmbedding> {
    validate_draw(x, draw)?;
    let landmarks = x.subset(draw.indices())?;
    let w = 1.0 / landmarks.len() as f64;
    let weights = vec![w; landmarks.len()];
    WeightedEmbedding::new(kernel.clone(), landmarks, weights)
}

/// Kernel herding over the dataset as candidate pool: greedily picks
/// `argmax_x (1/n) sum_i k(x, X_i) - (1/(t+1)) sum_{j<=t} k(x, y_j)`,
/// breaking ties by lowest dataset index, and returns uniform weights.
pub fn herding_embedding(x: &PointSet, kernel: &KernelSpec, m: usize) -> Result<WeightedEmbedding> {
    let n = x.len();
    if m == 0 {
        return Err(Error::invalid("m", "must be at least 1"));
    }
    if m > n {
        return Err(Error::invalid(
            "m",
            format!("subsample size {m} exceeds dataset size {n}"),
        ));
    }
    kernel.check_domain(x)?;

    // Mean kernel column z_j = (1/n) sum_i k(X_j, X_i), via the symmetric half.
    let mut z = vec![0.0f64; n];
    for i in 0..n {
        let xi = x.point(i);
        for j in i..n {
            let v = kernel.eval_unchecked(xi, x.point(j));
            z[i] += v;
            if j != i {
                z[j] += v;
            }
        }
    }
    let inv_n = 1.0 / n as f64;
    z.iter_mut().for_each(|v| *v *= inv_n);

    let mut selected = Vec::with_capacity(m);
    // history[j] = sum over selected y of k(X_j, y)
    let mut history = vec![0.0f64; n];
    for t in 0..m {
        let inv_t1 = 1.0 / (t as f64 + 1.0);
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for j in 0..n {
            let score = z[j] - inv_t1 * history[j];
            if score > best_score {
                best_score = score;
                best = j;
            }
        }
        selected.push(best);
        let yb = x.point(best);
        for (j, h) in history.iter_mut().enumerate() {
            *h += kernel.eval_unchecked(x.point(j), yb);
        }
    }

    let landmarks = x.subset(&selected)?;
    let w = 1.0 / m as f64;
    WeightedEmbedding::new(kernel.clone(), landmarks, vec![w; m])
}

/// Projects an embedding onto the span of `landmarks` features, returning
/// the minimum-norm weights `pinv(K_m) K_m,atoms alpha`.
pub fn project_onto_landmarks(
    e: &WeightedEmbedding,
    landmarks: &PointSet,
    rel_tol: f64,
) -> Result<WeightedEmbedding> {
    if landmarks.dim() != e.dim() {
        return Err(Error::DimensionMismatch {
            left: landmarks.dim(),
            right: e.dim(),
        });
    }
    e.kernel().check_domain(landmarks)?;
    let k_m = gram_self(e.kernel(), landmarks)?;
    let m = landmarks.len();
    let mut rhs = vec![0.0f64; m];
    for (i, ri) in rhs.iter_mut().enumerate() {
        let li = landmarks.point(i);
        let mut acc = 0.0;
        for (j, &w) in e.weights().iter().enumerate() {
            acc += w * e.kernel().eval_unchecked(li, e.landmarks().point(j));
        }
        *ri = acc;
    }
    let eig = PsdEigen::new(&k_m)?;
    let weights = eig.apply_pinv(rel_tol, &rhs)?;
    WeightedEmbedding::new(e.kernel().clone(), landmarks.clone(), weights)
}

fn check_compatible(a: &WeightedEmbedding, b: &WeightedEmbedding) -> Result<()> {
    if a.kernel() != b.kernel() {
        return Err(Error::KernelMismatch);
    }
    if a.num_atoms() > 0 && b.num_atoms() > 0 && a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(())
}

/// RKHS inner product `sum_ij a_i b_j k(x_i, y_j)`.
pub fn rkhs_inner(a: &WeightedEmbedding, b: &WeightedEmbedding) -> Result<f64> {
    check_compatible(a, b)?;
    let mut acc = 0.0;
    for (i, &wa) in a.weights().iter().enumerate() {
        let xi = a.landmarks().point(i);
        let mut row = 0.0;
        for (j, &wb) in b.weights().iter().enumerate() {
            row += wb * a.kernel().eval_unchecked(xi, b.landmarks().point(j));
        }
        acc += wa * row;
    }
    Ok(acc)
}

fn norm_sq_atoms(kernel: &KernelSpec, points: &PointSet, w: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (i, &wi) in w.iter().enumerate() {
        let xi = points.point(i);
        acc += wi * wi * kernel.eval_unchecked(xi, xi);
        let mut cross = 0.0;
        for (j, &wj) in w.iter().enumerate().skip(i + 1) {
            cross += wj * kernel.eval_unchecked(xi, points.point(j));
        }
        acc += 2.0 * wi * cross;
    }
    acc
}

/// Squared RKHS norm `alpha^T K alpha`, using the symmetric half of the
/// Gram sum.
pub fn rkhs_norm_sq(e: &WeightedEmbedding) -> f64 {
    norm_sq_atoms(e.kernel(), e.landmarks(), e.weights())
}

/// RKHS distance `||a - b||`, with negative squared distances from
/// cancellation clamped to zero (counted, not errored).
pub fn rkhs_distance(a: &WeightedEmbedding, b: &WeightedEmbedding) -> Result<f64> {
    check_compatible(a, b)?;
    if a == b {
        return Ok(0.0);
    }
    // Shared landmark set: the difference is a single expansion in the
    // weight deltas, which avoids the cancellation of three O(1) terms and
    // its ~sqrt(ulp) noise floor on nearly equal embeddings.
    let sq = if a.landmarks() == b.landmarks() {
        let delta: Vec<f64> = a
            .weights()
            .iter()
            .zip(b.weights())
            .map(|(x, y)| x - y)
            .collect();
        norm_sq_atoms(a.kernel(), a.landmarks(), &delta)
    } else {
        rkhs_norm_sq(a) - 2.0 * rkhs_inner(a, b)? + rkhs_norm_sq(b)
    };
    if sq < 0.0 {
        NEGATIVE_SQ_CLAMPS.fetch_add(1, Ordering::Relaxed);
        return Ok(0.0);
    }
    Ok(sq.sqrt())
}

/// Quadrature `sum_j alpha_j f(y_j)` against the embedding's atoms.
pub fn quadrature<F>(e: &WeightedEmbedding, f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut acc = 0.0;
    for (j, &w) in e.weights().iter().enumerate() {
        let v = f(e.landmarks().point(j));
        if !v.is_finite() {
            return Err(Error::NonFinite("quadrature integrand"));
        }
        acc += w * v;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psd_linalg::DEFAULT_REL_TOL;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian() -> KernelSpec {
        KernelSpec::gaussian(1.0).unwrap()
    }

    fn random_points(n: usize, d: usize, seed: u64) -> PointSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..n * d)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        PointSet::from_flat(n, d, data).unwrap()
    }

    #[test]
    fn empirical_weights_are_uniform() {
        let x = random_points(4, 2, 1);
        let e = empirical_embedding(&x, &gaussian()).unwrap();
        assert_eq!(e.weights(), &[0.25; 4]);
        let single = random_points(1, 2, 2);
        let e1 = empirical_embedding(&single, &gaussian()).unwrap();
        assert_eq!(e1.weights(), &[1.0]);
    }

    #[test]
    fn empirical_norm_matches_double_sum() {
        let x = random_points(10, 3, 3);
        let k = gaussian();
        let e = empirical_embedding(&x, &k).unwrap();
        let mut brute = 0.0;
        for i in 0..10 {
            for j in 0..10 {
                brute += k.evaluate(x.point(i), x.point(j)).unwrap();
            }
        }
        brute /= 100.0;
        assert!((rkhs_norm_sq(&e) - brute).abs() < 1e-12);
        assert!((rkhs_inner(&e, &e).unwrap() - brute).abs() < 1e-12);
    }

    #[test]
    fn sample_landmarks_determinism_and_bounds() {
        let a = sample_landmarks(50, 20, 7).unwrap();
        let b = sample_landmarks(50, 20, 7).unwrap();
        assert_eq!(a.indices(), b.indices());
        assert!(a.indices().iter().all(|&i| i < 50));
        let single = sample_landmarks(1, 1, 9).unwrap();
        assert_eq!(single.indices(), &[0]);
        assert!(sample_landmarks(5, 6, 0).is_err());
    }

    #[test]
    fn sample_landmarks_frequencies_near_uniform() {
        let n = 10;
        let m = 100_000;
        let draw = sample_landmarks(n, n, 0).unwrap();
        assert_eq!(draw.len(), n);
        // With-replacement frequencies over a large draw: redo manually since
        // m > n is rejected by the dataset-facing API.
        let mut rng = ChaCha8Rng::seed_from_u64(12345);
        let mut counts = [0usize; 10];
        for _ in 0..m {
            counts[rng.gen_range(0..n)] += 1;
        }
        let p = 0.1;
        let tol = 3.0 * (m as f64 * p * (1.0 - p)).sqrt() / m as f64;
        for &c in &counts {
            let freq = c as f64 / m as f64;
            assert!((freq - p).abs() <= tol, "freq {freq} tol {tol}");
        }
    }

    #[test]
    fn nystrom_full_draw_recovers_empirical() {
        let x = random_points(25, 2, 4);
        let k = gaussian();
        let draw = LandmarkDraw::from_indices((0..25).collect(), 0);
        let nys = nystrom_embedding(&x, &draw, &k, DEFAULT_REL_TOL).unwrap();
        let emp = empirical_embedding(&x, &k).unwrap();
        assert!(rkhs_distance(&nys, &emp).unwrap() < 1e-8);
        for &w in nys.weights() {
            assert!((w - 1.0 / 25.0).abs() < 1e-8);
        }
    }

    #[test]
    fn nystrom_identical_points_single_landmark() {
        let x = PointSet::from_flat(6, 1, vec![0.7; 6]).unwrap();
        let k = gaussian();
        let draw = LandmarkDraw::from_indices(vec![3], 0);
        let nys = nystrom_embedding(&x, &draw, &k, DEFAULT_REL_TOL).unwrap();
        assert!((nys.weights()[0] - 1.0).abs() < 1e-12);
        let emp = empirical_embedding(&x, &k).unwrap();
        // Distinct landmark sets force the three-term expansion, whose f64
        // noise floor is ~1.5e-8 even though the true distance is 0.
        assert!(rkhs_distance(&nys, &emp).unwrap() < 5e-8);
    }

    #[test]
    fn nystrom_weights_match_normal_equations() {
        use nalgebra::{DMatrix, DVector};
        let x = random_points(30, 2, 5);
        let k = gaussian();
        let draw = sample_landmarks(30, 5, 11).unwrap();
        let nys = nystrom_embedding(&x, &draw, &k, DEFAULT_REL_TOL).unwrap();

        // Independent route: dense solve of K_m beta = (1/n) K_mn 1_n.
        let lm = x.subset(draw.indices()).unwrap();
        let km = DMatrix::from_fn(5, 5, |i, j| k.evaluate(lm.point(i), lm.point(j)).unwrap());
        let rhs = DVector::from_fn(5, |i, _| {
            (0..30)
                .map(|j| k.evaluate(lm.point(i), x.point(j)).unwrap())
                .sum::<f64>()
                / 30.0
        });
        let beta = km.lu().solve(&rhs).expect("K_m nonsingular");
        for (a, b) in nys.weights().iter().zip(beta.iter()) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn nystrom_block_size_does_not_change_weights() {
        let x = random_points(200, 3, 6);
        let k = gaussian();
        let draw = sample_landmarks(200, 12, 13).unwrap();
        let a = nystrom_embedding_blocked(&x, &draw, &k, DEFAULT_REL_TOL, 7).unwrap();
        let b = nystrom_embedding_blocked(&x, &draw, &k, DEFAULT_REL_TOL, 4096).unwrap();
        for (wa, wb) in a.weights().iter().zip(b.weights()) {
            assert!((wa - wb).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_landmark_basics() {
        let x = random_points(8, 2, 7);
        let k = gaussian();
        let one = LandmarkDraw::from_indices(vec![5], 0);
        let e = uniform_landmark_embedding(&x, &one, &k).unwrap();
        assert_eq!(e.weights(), &[1.0]);

        let all = LandmarkDraw::from_indices((0..8).collect(), 0);
        let u = uniform_landmark_embedding(&x, &all, &k).unwrap();
        let emp = empirical_embedding(&x, &k).unwrap();
        assert_eq!(u, emp);
    }

    #[test]
    fn uniform_landmark_mean_converges_to_empirical() {
        // Average the uniform-landmark embedding over many seeds; the
        // distance to the empirical embedding must shrink as m grows.
        let n = 20;
        let x = random_points(n, 2, 8);
        let k = gaussian();
        let emp = empirical_embedding(&x, &k).unwrap();
        let seeds = 10_000u64;
        let mut dists = Vec::new();
        for &m in &[1usize, 4, 16] {
            let mut counts = vec![0u64; n];
            for s in 0..seeds {
                // Disjoint seed ranges per m keep the three averages independent.
                let draw = sample_landmarks(n, m, 100_000 * m as u64 + s).unwrap();
                for &i in draw.indices() {
                    counts[i] += 1;
                }
            }
            let total = (m as u64 * seeds) as f64;
            let weights: Vec<f64> = counts.iter().map(|&c| c as f64 / total).collect();
            let avg = WeightedEmbedding::new(k.clone(), x.clone(), weights).unwrap();
            dists.push(rkhs_distance(&avg, &emp).unwrap());
        }
        assert!(dists[0] > dists[1] && dists[1] > dists[2], "{dists:?}");
    }

    #[test]
    fn herding_first_pick_maximizes_mean_kernel() {
        let x = random_points(40, 2, 9);
        let k = gaussian();
        let h = herding_embedding(&x, &k, 1).unwrap();
        let mut best = (0, f64::NEG_INFINITY);
        for j in 0..40 {
            let score: f64 = (0..40)
                .map(|i| k.evaluate(x.point(j), x.point(i)).unwrap())
                .sum::<f64>()
                / 40.0;
            if score > best.1 {
                best = (j, score);
            }
        }
        assert_eq!(h.landmarks().point(0), x.point(best.0));
    }

    #[test]
    fn herding_full_support_beats_single_atom() {
        let x = random_points(5, 1, 10);
        let k = gaussian();
        let emp = empirical_embedding(&x, &k).unwrap();
        let herd = herding_embedding(&x, &k, 5).unwrap();
        let herd_err = rkhs_distance(&emp, &herd).unwrap();
        let best_single = (0..5)
            .map(|i| {
                let atom = WeightedEmbedding::atom(k.clone(), x.point(i)).unwrap();
                rkhs_distance(&emp, &atom).unwrap()
            })
            .fold(f64::INFINITY, f64::min);
        assert!(herd_err <= best_single + 1e-12);
    }

    #[test]
    fn herding_beats_mean_uniform_draw() {
        let x = random_points(50, 2, 11);
        let k = gaussian();
        let emp = empirical_embedding(&x, &k).unwrap();
        let herd_err = rkhs_distance(&emp, &herding_embedding(&x, &k, 10).unwrap()).unwrap();
        let mut total = 0.0;
        for s in 0..100 {
            let draw = sample_landmarks(50, 10, 500 + s).unwrap();
            let u = uniform_landmark_embedding(&x, &draw, &k).unwrap();
            total += rkhs_distance(&emp, &u).unwrap();
        }
        assert!(herd_err <= total / 100.0);
    }

    #[test]
    fn inner_product_reproduces_kernel() {
        let k = gaussian();
        let a = WeightedEmbedding::atom(k.clone(), &[0.4, -0.3]).unwrap();
        assert!((rkhs_inner(&a, &a).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inner_product_bilinear_exact() {
        let k = gaussian();
        let x = random_points(6, 2, 12);
        let y = random_points(4, 2, 13);
        let a = empirical_embedding(&x, &k).unwrap();
        let b = empirical_embedding(&y, &k).unwrap();
        let doubled = WeightedEmbedding::new(
            k.clone(),
            x.clone(),
            a.weights().iter().map(|w| 2.0 * w).collect(),
        )
        .unwrap();
        assert_eq!(
            rkhs_inner(&doubled, &b).unwrap(),
            2.0 * rkhs_inner(&a, &b).unwrap()
        );
    }

    #[test]
    fn inner_product_rejects_kernel_mismatch() {
        let a = WeightedEmbedding::atom(gaussian(), &[0.0]).unwrap();
        let b = WeightedEmbedding::atom(KernelSpec::gaussian(2.0).unwrap(), &[0.0]).unwrap();
        assert!(matches!(rkhs_inner(&a, &b), Err(Error::KernelMismatch)));
    }

    #[test]
    fn distance_identical_embeddings_is_zero() {
        let x = random_points(5, 2, 14);
        let e = empirical_embedding(&x, &gaussian()).unwrap();
        assert_eq!(rkhs_distance(&e, &e).unwrap(), 0.0);
    }

    #[test]
    fn distance_two_atoms_closed_form() {
        let k = gaussian();
        let a = WeightedEmbedding::atom(k.clone(), &[0.0, 0.0]).unwrap();
        let b = WeightedEmbedding::atom(k.clone(), &[1.0, 0.5]).unwrap();
        let kv = k.evaluate(&[0.0, 0.0], &[1.0, 0.5]).unwrap();
        let expected = (2.0 - 2.0 * kv).sqrt();
        assert!((rkhs_distance(&a, &b).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn distance_separates_distributions() {
        // N(0, I) vs N(3*1, I) in d = 2: the cross distance must dominate
        // the same-distribution distance in at least 95 of 100 seeded runs.
        let k = gaussian();
        let mut wins = 0;
        for s in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(9000 + s);
            let mut draw = |shift: f64, n: usize| {
                let data: Vec<f64> = (0..n * 2)
                    .map(|_| {
                        let v: f64 = StandardNormal.sample(&mut rng);
                        v + shift
                    })
                    .collect();
                PointSet::from_flat(n, 2, data).unwrap()
            };
            let x0 = draw(0.0, 100);
            let x1 = draw(0.0, 100);
            let y = draw(3.0, 100);
            let e0 = empirical_embedding(&x0, &k).unwrap();
            let e1 = empirical_embedding(&x1, &k).unwrap();
            let ey = empirical_embedding(&y, &k).unwrap();
            let same = rkhs_distance(&e0, &e1).unwrap();
            let cross = rkhs_distance(&e0, &ey).unwrap();
            if cross > same {
                wins += 1;
            }
        }
        assert!(wins >= 95, "separation wins: {wins}/100");
    }

    #[test]
    fn quadrature_constant_function() {
        let x = random_points(9, 2, 15);
        let k = gaussian();
        let emp = empirical_embedding(&x, &k).unwrap();
        assert!((quadrature(&emp, |_| 1.0).unwrap() - 1.0).abs() < 1e-12);

        let draw = sample_landmarks(9, 4, 3).unwrap();
        let nys = nystrom_embedding(&x, &draw, &k, DEFAULT_REL_TOL).unwrap();
        let wsum: f64 = nys.weights().iter().sum();
        assert_eq!(quadrature(&nys, |_| 1.0).unwrap(), wsum);
    }

    #[test]
    fn quadrature_reproducing_property() {
        let x = random_points(7, 2, 16);
        let k = gaussian();
        let e = empirical_embedding(&x, &k).unwrap();
        let z = [0.3, -1.1];
        let viaf = quadrature(&e, |p| k.evaluate(p, &z).unwrap()).unwrap();
        let atom = WeightedEmbedding::atom(k.clone(), &z).unwrap();
        let via_inner = rkhs_inner(&e, &atom).unwrap();
        assert!((viaf - via_inner).abs() < 1e-12);
    }

    #[test]
    fn quadrature_propagates_non_finite() {
        let x = random_points(3, 1, 17);
        let e = empirical_embedding(&x, &gaussian()).unwrap();
        assert!(matches!(
            quadrature(&e, |_| f64::NAN),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn zero_embedding_behaves_like_origin() {
        let k = gaussian();
        let z = WeightedEmbedding::zero(k.clone(), 2);
        assert_eq!(z.num_atoms(), 0);
        assert_eq!(rkhs_norm_sq(&z), 0.0);
        assert_eq!(quadrature(&z, |_| 1.0).unwrap(), 0.0);
        let a = WeightedEmbedding::atom(k, &[0.0, 0.0]).unwrap();
        assert_eq!(rkhs_inner(&z, &a).unwrap(), 0.0);
        assert!((rkhs_distance(&z, &a).unwrap() - 1.0).abs() < 1e-12);
    }
}
