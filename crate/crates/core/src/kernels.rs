//! Kernel functions, Gram-matrix assembly, and bandwidth selection.

use rand::seq::index::sample as index_sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::psd_linalg::SymMatrix;

/// Default subset size for [`median_heuristic`].
pub const DEFAULT_MEDIAN_SUBSET: usize = 1000;

/// A positive-definite kernel together with the parameters that make its
/// boundedness constant `K = sup_x sqrt(k(x,x))` computable.
#[derive(Clone, Debug, PartialEq)]
pub enum KernelSpec {
    /// `k(x,y) = exp(-||x-y||^2 / (2 bandwidth^2))`, K = 1.
    Gaussian { bandwidth: f64 },
    /// `k(x,y) = exp(-||x-y|| / scale)`, K = 1.
    Laplacian { scale: f64 },
    /// `k(x,y) = (<x,y> + offset)^degree` on the ball of radius
    /// `domain_radius`, K = (domain_radius^2 + offset)^(degree/2).
    Polynomial {
        degree: u32,
        offset: f64,
        domain_radius: f64,
    },
}

impl KernelSpec {
    pub fn gaussian(bandwidth: f64) -> Result<Self> {
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::invalid(
                "bandwidth",
                format!("must be a positive finite real, got {bandwidth}"),
            ));
        }
        Ok(KernelSpec::Gaussian { bandwidth })
    }

    pub fn laplacian(scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::invalid(
                "scale",
                format!("must be a positive finite real, got {scale}"),
            ));
        }
        Ok(KernelSpec::Laplacian { scale })
    }

    pub fn polynomial(degree: u32, offset: f64, domain_radius: f64) -> Result<Self> {
        if degree < 1 {
            return Err(Error::invalid("degree", "must be at least 1"));
        }
        if !(offset.is_finite() && offset >= 0.0) {
            return Err(Error::invalid(
                "offset",
                format!("must be a non-negative finite real, got {offset}"),
            ));
        }
        if !(domain_radius.is_finite() && domain_radius > 0.0) {
            return Err(Error::invalid(
                "domain_radius",
                format!("must be a positive finite real, got {domain_radius}"),
            ));
        }
        Ok(KernelSpec::Polynomial {
            degree,
            offset,
            domain_radius,
        })
    }

    /// The boundedness constant `K` with `sup_x k(x,x) <= K^2`.
    pub fn boundedness_constant(&self) -> f64 {
        match *self {
            KernelSpec::Gaussian { .. } | KernelSpec::Laplacian { .. } => 1.0,
            KernelSpec::Polynomial {
                degree,
                offset,
                domain_radius,
            } => (domain_radius * domain_radius + offset).powf(f64::from(degree) / 2.0),
        }
    }

    /// Evaluates `k(x, y)`.
    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                left: x.len(),
                right: y.len(),
            });
        }
        if !x.iter().chain(y).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("kernel input point"));
        }
        Ok(self.eval_unchecked(x, y))
    }

    /// Same as [`evaluate`](Self::evaluate) but skips input validation;
    /// callers must have checked dimensions and finiteness.
    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            KernelSpec::Gaussian { bandwidth } => {
                let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-sq / (2.0 * bandwidth * bandwidth)).exp()
            }
            KernelSpec::Laplacian { scale } => {
                let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-sq.sqrt() / scale).exp()
            }
            KernelSpec::Polynomial { degree, offset, .. } => {
                let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
                (dot + offset).powi(degree as i32)
            }
        }
    }

    /// Checks that every point of `points` lies in the kernel's domain.
    ///
    /// Only the polynomial kernel restricts its domain (a centered ball);
    /// radial kernels accept all of R^d.
    pub fn check_domain(&self, points: &PointSet) -> Result<()> {
        if let KernelSpec::Polynomial { domain_radius, .. } = *self {
            for i in 0..points.len() {
                let norm = points.point(i).iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > domain_radius {
                    return Err(Error::DomainViolation {
                        index: i,
                        norm,
                        radius: domain_radius,
                    });
                }
            }
        }
        Ok(())
    }
}

/// A set of `n` points in `R^d`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    data: Vec<f64>,
    n: usize,
    dim: usize,
}

impl PointSet {
    /// Builds a point set from rows; all rows must share one dimension and
    /// all coordinates must be finite.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput("point set"));
        }
        let dim = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(rows.len(), dim, data)
    }

    /// Builds a point set from `n * dim` row-major coordinates.
    pub fn from_flat(n: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInput("point set"));
        }
        if dim == 0 {
            return Err(Error::invalid("dim", "must be at least 1"));
        }
        if data.len() != n * dim {
            return Err(Error::SizeMismatch {
                expected: n * dim,
                got: data.len(),
            });
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("point coordinates"));
        }
        Ok(PointSet { data, n, dim })
    }

    /// Like [`from_flat`](Self::from_flat) but additionally validates the
    /// kernel's domain constraint, so Assumption-style boundedness holds on
    /// every stored point.
    pub fn for_kernel(n: usize, dim: usize, data: Vec<f64>, kernel: &KernelSpec) -> Result<Self> {
        let points = Self::from_flat(n, dim, data)?;
        kernel.check_domain(&points)?;
        Ok(points)
    }

    // Landmark lists of Nyström embeddings may legitimately be empty
    // (the zero embedding); datasets may not.
    pub(crate) fn empty(dim: usize) -> Self {
        PointSet {
            data: Vec::new(),
            n: 0,
            dim,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Extracts the points at `indices` (duplicates allowed) into a new set.
    pub fn subset(&self, indices: &[usize]) -> Result<PointSet> {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            if i >= self.n {
                return Err(Error::invalid(
                    "indices",
                    format!("index {i} out of range for {} points", self.n),
                ));
            }
            data.extend_from_slice(self.point(i));
        }
        PointSet::from_flat(indices.len(), self.dim, data)
    }
}

/// Gram matrix with entries `k(A_i, B_j)`.
pub fn gram(kernel: &KernelSpec, a: &PointSet, b: &PointSet) -> Result<Matrix> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    kernel.check_domain(a)?;
    kernel.check_domain(b)?;
    let mut out = Matrix::zeros(a.len(), b.len());
    for i in 0..a.len() {
        let xi = a.point(i);
        for j in 0..b.len() {
            out[(i, j)] = kernel.eval_unchecked(xi, b.point(j));
        }
    }
    Ok(out)
}

/// Gram matrix of a point set with itself, assembled from the upper
/// triangle so the result is symmetric by construction.
pub fn gram_self(kernel: &KernelSpec, a: &PointSet) -> Result<SymMatrix> {
    kernel.check_domain(a)?;
    let n = a.len();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        let xi = a.point(i);
        for j in i..n {
            let v = kernel.eval_unchecked(xi, a.point(j));
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    SymMatrix::new(out)
}

/// Gaussian-kernel bandwidth by the median heuristic: the median of the
/// pairwise Euclidean distances over a random subset of at most
/// `subset_size` points (all points when the set is small enough).
///
/// The lower median (element `ceil(M/2)` of the `M` sorted distances) is
/// used, so the result is deterministic for even counts.
pub fn median_heuristic(x: &PointSet, subset_size: usize, rng_seed: u64) -> Result<f64> {
    if subset_size < 2 {
        return Err(Error::invalid("subset_size", "must be at least 2"));
    }
    let take = subset_size.min(x.len());
    if take < 2 {
        return Err(Error::invalid(
            "points",
            "need at least 2 points for pairwise distances",
        ));
    }
    let indices: Vec<usize> = if take == x.len() {
        (0..x.len()).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        index_sample(&mut rng, x.len(), take).into_vec()
    };

    let mut dists = Vec::with_capacity(take * (take - 1) / 2);
    for (pos, &i) in indices.iter().enumerate() {
        let xi = x.point(i);
        for &j in &indices[pos + 1..] {
            let sq: f64 = xi
                .iter()
                .zip(x.point(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            dists.push(sq.sqrt());
        }
    }
    dists.sort_by(|a, b| a.total_cmp(b));
    let median = dists[dists.len().div_ceil(2) - 1];
    if median <= 0.0 {
        return Err(Error::DegenerateBandwidth);
    }
    Ok(median)
}
