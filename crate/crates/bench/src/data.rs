//! Dataset generation and ingestion, plus the on-disk embedding record.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use kme_core::oracle::{sample_mixture, GaussianMixture};
use kme_core::{KernelSpec, PointSet, WeightedEmbedding};
use rand::seq::index::sample as index_sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{BenchError, Result};

/// Draws `p` mixture centers from `N(0, center_scale * I)` and wraps them in
/// an equal-weight unit-covariance mixture. The mixture is meant to be drawn
/// once per experiment and shared across all sample sizes and trials.
pub fn synthetic_mixture(
    d: usize,
    p: usize,
    center_scale: f64,
    seed: u64,
) -> Result<GaussianMixture> {
    if d == 0 || p == 0 {
        return Err(BenchError::config(
            "dimension and component count must be positive",
        ));
    }
    if !(center_scale.is_finite() && center_scale >= 0.0) {
        return Err(BenchError::config(
            "center_scale must be a non-negative real",
        ));
    }
    let std = center_scale.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = (0..p)
        .map(|_| {
            (0..d)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    std * z
                })
                .collect()
        })
        .collect();
    Ok(GaussianMixture::uniform_isotropic(centers)?)
}

/// The full synthetic recipe: the fixed mixture plus one `n`-point sample.
pub fn generate_synthetic(
    d: usize,
    p: usize,
    center_scale: f64,
    n: usize,
    seed: u64,
) -> Result<(GaussianMixture, PointSet)> {
    let mix = synthetic_mixture(d, p, center_scale, seed)?;
    let points = sample_mixture(&mix, n, seed.wrapping_add(1))?;
    Ok((mix, points))
}

/// Loads a CSV of numeric rows. Rows must all have the same number of
/// fields; ragged or non-numeric rows fail with their line number. When the
/// file holds more than `limit` rows, a seeded uniform subset of `limit`
/// rows is kept (in file order).
pub fn load_csv(path: &Path, limit: usize, seed: u64) -> Result<PointSet> {
    if limit == 0 {
        return Err(BenchError::config("dataset.limit must be at least 1"));
    }
    let file = std::fs::File::open(path).map_err(|e| BenchError::io(path, e))?;
    let reader = BufReader::new(file);

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut dim = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| BenchError::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for field in trimmed.split(',') {
            let field = field.trim();
            let v: f64 = field.parse().map_err(|_| {
                BenchError::parse(path, idx + 1, format!("non-numeric field {field:?}"))
            })?;
            if !v.is_finite() {
                return Err(BenchError::parse(
                    path,
                    idx + 1,
                    format!("non-finite value {v}"),
                ));
            }
            row.push(v);
        }
        match dim {
            None => dim = Some(row.len()),
            Some(d) if d != row.len() => {
                return Err(BenchError::parse(
                    path,
                    idx + 1,
                    format!("row has {} fields, expected {d}", row.len()),
                ));
            }
            _ => {}
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(BenchError::parse(path, 1, "no data rows".to_string()));
    }

    if rows.len() > limit {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut keep = index_sample(&mut rng, rows.len(), limit).into_vec();
        keep.sort_unstable();
        let rows: Vec<Vec<f64>> = keep.into_iter().map(|i| rows[i].clone()).collect();
        Ok(PointSet::from_rows(&rows)?)
    } else {
        Ok(PointSet::from_rows(&rows)?)
    }
}

/// Uniform subsample of `n` distinct rows (seeded, original order kept).
pub fn subsample(points: &PointSet, n: usize, seed: u64) -> Result<PointSet> {
    if n == 0 || n > points.len() {
        return Err(BenchError::config(format!(
            "subsample size {n} must lie in [1, {}]",
            points.len()
        )));
    }
    if n == points.len() {
        return Ok(points.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = index_sample(&mut rng, points.len(), n).into_vec();
    keep.sort_unstable();
    Ok(points.subset(&keep)?)
}

const EMBEDDING_MAGIC: &str = "kme-embedding v1";

/// Writes the embedding record: kernel spec, atom count and dimension,
/// landmarks row-major, then weights. Floats use shortest round-trip
/// formatting, so reading back is bit-exact.
pub fn write_embedding(path: &Path, e: &WeightedEmbedding) -> Result<()> {
    let mut out = String::new();
    out.push_str(EMBEDDING_MAGIC);
    out.push('\n');
    match *e.kernel() {
        KernelSpec::Gaussian { bandwidth } => {
            out.push_str(&format!("kernel gaussian {bandwidth}\n"));
        }
        KernelSpec::Laplacian { scale } => {
            out.push_str(&format!("kernel laplacian {scale}\n"));
        }
        KernelSpec::Polynomial {
            degree,
            offset,
            domain_radius,
        } => {
            out.push_str(&format!(
                "kernel polynomial {degree} {offset} {domain_radius}\n"
            ));
        }
    }
    out.push_str(&format!("size {} {}\n", e.num_atoms(), e.dim()));
    for j in 0..e.num_atoms() {
        out.push_str("landmark");
        for v in e.landmarks().point(j) {
            out.push_str(&format!(" {v}"));
        }
        out.push('\n');
    }
    for w in e.weights() {
        out.push_str(&format!("weight {w}\n"));
    }
    let mut f = std::fs::File::create(path).map_err(|e| BenchError::io(path, e))?;
    f.write_all(out.as_bytes())
        .map_err(|e| BenchError::io(path, e))
}

/// Reads an embedding record written by [`write_embedding`].
pub fn read_embedding(path: &Path) -> Result<WeightedEmbedding> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let fail = |line: usize, msg: String| -> BenchError { BenchError::parse(path, line, msg) };

    let (_, magic) = lines.next().ok_or_else(|| fail(1, "empty file".into()))?;
    if magic != EMBEDDING_MAGIC {
        return Err(fail(1, format!("bad header {magic:?}")));
    }

    let (i, kernel_line) = lines
        .next()
        .ok_or_else(|| fail(2, "missing kernel line".into()))?;
    let parts: Vec<&str> = kernel_line.split_whitespace().collect();
    let parse_f = |s: &str, line: usize| -> Result<f64> {
        s.parse()
            .map_err(|_| fail(line + 1, format!("invalid number {s:?}")))
    };
    let kernel = match parts.as_slice() {
        ["kernel", "gaussian", bw] => KernelSpec::gaussian(parse_f(bw, i)?)?,
        ["kernel", "laplacian", s] => KernelSpec::laplacian(parse_f(s, i)?)?,
        ["kernel", "polynomial", deg, off, rad] => {
            let degree: u32 = deg
                .parse()
                .map_err(|_| fail(i + 1, format!("invalid degree {deg:?}")))?;
            KernelSpec::polynomial(degree, parse_f(off, i)?, parse_f(rad, i)?)?
        }
        _ => return Err(fail(i + 1, format!("bad kernel line {kernel_line:?}"))),
    };

    let (i, size_line) = lines
        .next()
        .ok_or_else(|| fail(3, "missing size line".into()))?;
    let parts: Vec<&str> = size_line.split_whitespace().collect();
    let (m, d) = match parts.as_slice() {
        ["size", m, d] => {
            let m: usize = m
                .parse()
                .map_err(|_| fail(i + 1, format!("invalid atom count {m:?}")))?;
            let d: usize = d
                .parse()
                .map_err(|_| fail(i + 1, format!("invalid dimension {d:?}")))?;
            (m, d)
        }
        _ => return Err(fail(i + 1, format!("bad size line {size_line:?}"))),
    };

    let mut coords = Vec::with_capacity(m * d);
    for _ in 0..m {
        let (i, line) = lines
            .next()
            .ok_or_else(|| fail(0, "missing landmark line".into()))?;
        let mut fields = line.split_whitespace();
        if fields.next() != Some("landmark") {
            return Err(fail(i + 1, format!("expected landmark line, got {line:?}")));
        }
        let row: Vec<f64> = fields.map(|s| parse_f(s, i)).collect::<Result<_>>()?;
        if row.len() != d {
            return Err(fail(
                i + 1,
                format!("landmark has {} coords, expected {d}", row.len()),
            ));
        }
        coords.extend_from_slice(&row);
    }

    let mut weights = Vec::with_capacity(m);
    for _ in 0..m {
        let (i, line) = lines
            .next()
            .ok_or_else(|| fail(0, "missing weight line".into()))?;
        let mut fields = line.split_whitespace();
        if fields.next() != Some("weight") {
            return Err(fail(i + 1, format!("expected weight line, got {line:?}")));
        }
        let w = fields
            .next()
            .ok_or_else(|| fail(i + 1, "missing weight value".into()))?;
        weights.push(parse_f(w, i)?);
    }

    if m == 0 {
        return Ok(WeightedEmbedding::zero(kernel, d));
    }
    let landmarks = PointSet::from_flat(m, d, coords)?;
    Ok(WeightedEmbedding::new(kernel, landmarks, weights)?)
}
