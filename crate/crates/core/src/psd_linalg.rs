//! Symmetric PSD eigendecomposition and tolerance-thresholded pseudo-inversion.
//!
//! Gram matrices are PSD in exact arithmetic but acquire small negative
//! eigenvalues in floating point; everything here clamps those to zero
//! instead of failing. The pseudo-inverse uses a symmetric eigendecomposition
//! (not a generic SVD) so a single relative tolerance decides which
//! eigenvalues are treated as zero.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Default relative eigenvalue cutoff for pseudo-inversion. Large enough to
/// absorb the rank deficiency caused by duplicated landmarks from
/// with-replacement sampling.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// Relative threshold below which a negative eigenvalue is considered more
/// than floating-point noise and flagged.
const NEGATIVE_EIG_TOL: f64 = 1e-8;

/// A symmetric matrix, validated at construction.
#[derive(Clone, Debug)]
pub struct SymMatrix {
    inner: Matrix,
}

impl SymMatrix {
    /// Validates squareness, finiteness, and symmetry within
    /// `1e-12 * max|entry|`.
    pub fn new(m: Matrix) -> Result<Self> {
        if m.rows() == 0 {
            return Err(Error::EmptyInput("matrix"));
        }
        if m.rows() != m.cols() {
            return Err(Error::DimensionMismatch {
                left: m.rows(),
                right: m.cols(),
            });
        }
        if !m.as_slice().iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        let max_abs = m.as_slice().iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
        let tol = 1e-12 * max_abs;
        for i in 0..m.rows() {
            for j in (i + 1)..m.cols() {
                let delta = (m[(i, j)] - m[(j, i)]).abs();
                if delta > tol {
                    return Err(Error::NotSymmetric { i, j, delta });
                }
            }
        }
        Ok(SymMatrix { inner: m })
    }

    pub fn order(&self) -> usize {
        self.inner.rows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.inner
    }

    pub fn into_matrix(self) -> Matrix {
        self.inner
    }
}

/// Cached eigendecomposition of a symmetric PSD matrix.
///
/// Eigenvalues are stored in descending order with negatives clamped to
/// zero; [`raw_min_eigenvalue`](Self::raw_min_eigenvalue) and
/// [`negatives_clamped`](Self::negatives_clamped) expose what was clamped.
#[derive(Clone, Debug)]
pub struct PsdEigen {
    values: Vec<f64>,
    // Column i of `vectors` is the eigenvector for `values[i]`.
    vectors: DMatrix<f64>,
    raw_min: f64,
    negatives_clamped: bool,
}

impl PsdEigen {
    pub fn new(m: &SymMatrix) -> Result<Self> {
        let n = m.order();
        let dm = DMatrix::from_fn(n, n, |i, j| m.as_matrix()[(i, j)]);
        let eig = dm.clone().symmetric_eigen();
        let (mut raw_vals, mut raw_vecs) = (eig.eigenvalues, eig.eigenvectors);

        // The QR-based solver occasionally misconverges and returns wrong
        // eigenvalues with an orthogonal basis. Probe the factorization
        // residual and fall back to cyclic Jacobi when it is off.
        if !factorization_ok(&dm, &raw_vecs, &raw_vals) {
            let (jv, jm) = jacobi_eigen(&dm);
            raw_vals = jv;
            raw_vecs = jm;
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| raw_vals[b].total_cmp(&raw_vals[a]));

        let raw_desc: Vec<f64> = order.iter().map(|&i| raw_vals[i]).collect();
        let raw_min = *raw_desc.last().unwrap();
        let lambda_max = raw_desc[0].max(0.0);
        let negatives_clamped = raw_min < -NEGATIVE_EIG_TOL * lambda_max;
        let values: Vec<f64> = raw_desc.iter().map(|&v| v.max(0.0)).collect();

        let mut vectors = DMatrix::zeros(n, n);
        for (col, &i) in order.iter().enumerate() {
            vectors.set_column(col, &raw_vecs.column(i));
        }
        Ok(PsdEigen {
            values,
            vectors,
            raw_min,
            negatives_clamped,
        })
    }

    /// Clamped eigenvalues, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    /// Smallest eigenvalue before clamping.
    pub fn raw_min_eigenvalue(&self) -> f64 {
        self.raw_min
    }

    /// True when an eigenvalue below `-1e-8 * lambda_max` was clamped,
    /// i.e. the input was further from PSD than floating-point noise.
    pub fn negatives_clamped(&self) -> bool {
        self.negatives_clamped
    }

    fn inverted_values(&self, rel_tol: f64) -> Result<Vec<f64>> {
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(Error::invalid(
                "rel_tol",
                format!("must lie in (0, 1), got {rel_tol}"),
            ));
        }
        let lambda_max = self.values[0];
        let cut = rel_tol * lambda_max;
        Ok(self
            .values
            .iter()
            .map(|&v| if v > cut && v > 0.0 { 1.0 / v } else { 0.0 })
            .collect())
    }

    /// Applies the pseudo-inverse to a vector without materializing it.
    pub fn apply_pinv(&self, rel_tol: f64, v: &[f64]) -> Result<Vec<f64>> {
        let n = self.values.len();
        if v.len() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                got: v.len(),
            });
        }
        let inv = self.inverted_values(rel_tol)?;
        let coeffs = self.vectors.transpose() * DVector::from_column_slice(v);
        let scaled = DVector::from_iterator(n, coeffs.iter().zip(&inv).map(|(c, w)| c * w));
        Ok((&self.vectors * scaled).as_slice().to_vec())
    }

    /// Materializes the Moore–Penrose pseudo-inverse.
    pub fn pinv(&self, rel_tol: f64) -> Result<SymMatrix> {
        let n = self.values.len();
        let inv = self.inverted_values(rel_tol)?;
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut acc = 0.0;
                for (k, &w) in inv.iter().enumerate() {
                    if w != 0.0 {
                        acc += w * self.vectors[(i, k)] * self.vectors[(j, k)];
                    }
                }
                out[(i, j)] = acc;
                out[(j, i)] = acc;
            }
        }
        SymMatrix::new(out)
    }
}

/// Checks `||A v - lambda v||` on a few fixed pseudo-random probe vectors;
/// O(n^2), separates healthy factorizations (~n * eps relative residual)
/// from misconverged ones (1e-4 and worse) by a wide margin.
fn factorization_ok(a: &DMatrix<f64>, vecs: &DMatrix<f64>, vals: &DVector<f64>) -> bool {
    let n = a.nrows();
    let scale = vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        return a.iter().all(|&v| v == 0.0);
    }
    let mut state = 0x243F_6A88_85A3_08D3u64;
    let mut next = move || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    for _ in 0..3 {
        let u = DVector::from_fn(n, |_, _| next());
        let vu = vecs * &u;
        let avu = a * &vu;
        let scaled = DVector::from_iterator(n, u.iter().zip(vals.iter()).map(|(x, l)| x * l));
        let vlu = vecs * scaled;
        if (avu - vlu).norm() > 1e-8 * scale * u.norm() {
            return false;
        }
    }
    true
}

/// Cyclic Jacobi eigendecomposition with accumulated rotations. Slower than
/// the QR path but unconditionally convergent for symmetric input; used
/// only when the fast path fails its residual probe.
fn jacobi_eigen(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let total_norm = m.norm().max(f64::MIN_POSITIVE);

    for _ in 0..60 {
        let mut off_sq = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off_sq += m[(p, q)] * m[(p, q)];
            }
        }
        if (2.0 * off_sq).sqrt() <= 1e-14 * total_norm {
            break;
        }
        for p in 0..(n - 1) {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let mip = m[(i, p)];
                    let miq = m[(i, q)];
                    m[(i, p)] = c * mip - s * miq;
                    m[(i, q)] = s * mip + c * miq;
                }
                for j in 0..n {
                    let mpj = m[(p, j)];
                    let mqj = m[(q, j)];
                    m[(p, j)] = c * mpj - s * mqj;
                    m[(q, j)] = s * mpj + c * mqj;
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = c * vip - s * viq;
                    v[(i, q)] = s * vip + c * viq;
                }
            }
        }
    }
    (DVector::from_fn(n, |i, _| m[(i, i)]), v)
}

/// All eigenvalues of `m`, descending, with negatives clamped to zero.
pub fn eigvals_desc(m: &SymMatrix) -> Result<Vec<f64>> {
    Ok(PsdEigen::new(m)?.eigenvalues().to_vec())
}

/// Moore–Penrose pseudo-inverse of a symmetric PSD matrix, inverting
/// eigenvalues above `rel_tol * lambda_max` and zeroing the rest.
pub fn pinv_psd(m: &SymMatrix, rel_tol: f64) -> Result<SymMatrix> {
    PsdEigen::new(m)?.pinv(rel_tol)
}

/// Computes `pinv(m) * v` through a one-shot eigendecomposition.
pub fn apply_pinv(m: &SymMatrix, rel_tol: f64, v: &[f64]) -> Result<Vec<f64>> {
    PsdEigen::new(m)?.apply_pinv(rel_tol, v)
}
