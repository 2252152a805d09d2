//! Error-vs-m sweeps: per-trial estimator construction, error evaluation
//! against the experiment's reference, and CSV emission.
//!
//! Every trial derives its RNG stream from a stable 64-bit hash of
//! `(master_seed, n, estimator id, m, trial)`, so records are reproducible
//! and independent of execution order; records are sorted before emission
//! and the output is byte-identical across thread counts.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use kme_core::embedding::{
    empirical_embedding, herding_embedding, nystrom_embedding, rkhs_norm_sq, sample_landmarks,
    uniform_landmark_embedding,
};
use kme_core::kernels::median_heuristic;
use kme_core::oracle::{exact_error, sample_mixture, GaussianMixture};
use kme_core::psd_linalg::DEFAULT_REL_TOL;
use kme_core::{KernelSpec, PointSet, WeightedEmbedding};
use rayon::prelude::*;

use crate::config::{DatasetConfig, Estimator, ExperimentConfig, KernelChoice, Timing};
use crate::data::{load_csv, subsample, synthetic_mixture};
use crate::error::{BenchError, Result};

const SEED_TAG_MIXTURE: u64 = 0x6d69_7874;
const SEED_TAG_BANDWIDTH: u64 = 0x6261_6e64;
const SEED_TAG_DATA: u64 = 0x6461_7461;

// Reserved estimator-id slots for derived streams; the real estimators use
// ids 0..=3. The data stream excludes estimator and m so every estimator
// sees the same n-sample in a given trial (paired protocol); the draw
// stream excludes only the estimator so Nyström and uniform-landmark
// records at the same (n, m, trial) share one landmark draw.
const STREAM_DATA: u64 = 100;
const STREAM_DRAW: u64 = 101;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable per-trial seed from `(master_seed, n, estimator id, m, trial)`.
/// Pure integer mixing, identical on every platform and Rust release.
pub fn stable_seed(master_seed: u64, n: usize, estimator_id: u64, m: usize, trial: usize) -> u64 {
    let mut h = splitmix64(master_seed);
    for v in [n as u64, estimator_id, m as u64, trial as u64] {
        h = splitmix64(h ^ v);
    }
    h
}

/// One sweep result row.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorRecord {
    pub estimator: Estimator,
    pub n: usize,
    /// 0 for the empirical estimator.
    pub m: usize,
    pub trial: usize,
    pub seed: u64,
    pub error: f64,
    pub elapsed_ms: f64,
}

/// A trial that failed; reported alongside the records, never as a row.
#[derive(Clone, Debug)]
pub struct Diagnostic {
    pub estimator: Estimator,
    pub n: usize,
    pub m: usize,
    pub trial: usize,
    pub message: String,
}

#[derive(Debug)]
pub struct SweepOutput {
    pub records: Vec<ErrorRecord>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Aggregated statistics per `(estimator, n, m)` cell.
#[derive(Clone, Debug)]
pub struct SummaryRow {
    pub estimator: Estimator,
    pub n: usize,
    pub m: usize,
    pub mean: f64,
    pub p5: f64,
    pub p95: f64,
    pub mean_elapsed_ms: f64,
}

enum Reference {
    Synthetic(GaussianMixture),
    Csv {
        points: PointSet,
        /// `(1/N^2) 1^T K_N 1`, computed once per dataset.
        norm_sq_term: f64,
    },
}

impl Reference {
    fn error_of(&self, e: &WeightedEmbedding) -> kme_core::Result<f64> {
        match self {
            Reference::Synthetic(mix) => exact_error(mix, e),
            Reference::Csv {
                points,
                norm_sq_term,
            } => Ok(reference_distance(points, *norm_sq_term, e)),
        }
    }
}

/// `(1/N^2) 1^T K_N 1` over the full reference set, streamed by rows.
/// Rows are independent work items; the final reduction is in index order,
/// so the value does not depend on the thread count.
fn reference_norm_sq_term(kernel: &KernelSpec, points: &PointSet) -> f64 {
    let n = points.len();
    let row_sums: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = points.point(i);
            let mut acc = kernel_eval(kernel, xi, xi);
            for j in (i + 1)..n {
                acc += 2.0 * kernel_eval(kernel, xi, points.point(j));
            }
            acc
        })
        .collect();
    row_sums.iter().sum::<f64>() / (n as f64 * n as f64)
}

fn kernel_eval(kernel: &KernelSpec, x: &[f64], y: &[f64]) -> f64 {
    // Points were validated at load; evaluate cannot fail on them.
    kernel.evaluate(x, y).expect("validated points")
}

/// RKHS distance between the full-set empirical embedding and `e` via the
/// cross-Gram identity, in O(N * m) kernel evaluations.
pub fn reference_distance(points: &PointSet, norm_sq_term: f64, e: &WeightedEmbedding) -> f64 {
    let n = points.len();
    let cross: f64 = (0..n)
        .map(|i| {
            let xi = points.point(i);
            let mut acc = 0.0;
            for (j, &w) in e.weights().iter().enumerate() {
                acc += w * kernel_eval(e.kernel(), e.landmarks().point(j), xi);
            }
            acc
        })
        .sum();
    let sq = norm_sq_term + rkhs_norm_sq(e) - 2.0 / n as f64 * cross;
    sq.max(0.0).sqrt()
}

struct WorkItem {
    estimator: Estimator,
    n: usize,
    m: usize,
    trial: usize,
}

/// Runs the full sweep on a thread pool of `threads` workers (0 = default).
pub fn run_sweep(config: &ExperimentConfig, threads: usize) -> Result<SweepOutput> {
    config.validate()?;

    let reference = match &config.dataset {
        DatasetConfig::Synthetic {
            d, p, center_scale, ..
        } => Reference::Synthetic(synthetic_mixture(
            *d,
            *p,
            *center_scale,
            splitmix64(config.master_seed ^ SEED_TAG_MIXTURE),
        )?),
        DatasetConfig::Csv { path, limit } => {
            let points = load_csv(path, *limit, splitmix64(config.master_seed ^ SEED_TAG_DATA))?;
            if let Some(&max_n) = config.n_values.last() {
                if max_n > points.len() {
                    return Err(BenchError::config(format!(
                        "sweep.n entry {max_n} exceeds the {} loaded rows",
                        points.len()
                    )));
                }
            }
            Reference::Csv {
                points,
                norm_sq_term: f64::NAN, // filled below, after the kernel is fixed
            }
        }
    };

    let kernel = resolve_kernel(config, &reference)?;

    let reference = match reference {
        Reference::Csv { points, .. } => {
            let norm_sq_term = reference_norm_sq_term(&kernel, &points);
            Reference::Csv {
                points,
                norm_sq_term,
            }
        }
        synthetic => synthetic,
    };

    let mut items = Vec::new();
    for &estimator in &config.estimators {
        let ms: &[usize] = if estimator.uses_m_grid() {
            &config.m_grid
        } else {
            &[0]
        };
        for &n in &config.n_values {
            for &m in ms {
                for trial in 0..config.trials {
                    items.push(WorkItem {
                        estimator,
                        n,
                        m,
                        trial,
                    });
                }
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| BenchError::config(format!("thread pool: {e}")))?;
    let results: Vec<std::result::Result<ErrorRecord, Diagnostic>> = pool.install(|| {
        items
            .par_iter()
            .map(|item| run_trial(config, &kernel, &reference, item))
            .collect()
    });

    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(diag) => diagnostics.push(diag),
        }
    }
    records.sort_by(|a, b| {
        (a.estimator.name(), a.n, a.m, a.trial).cmp(&(b.estimator.name(), b.n, b.m, b.trial))
    });
    Ok(SweepOutput {
        records,
        diagnostics,
    })
}

fn resolve_kernel(config: &ExperimentConfig, reference: &Reference) -> Result<KernelSpec> {
    match &config.kernel {
        KernelChoice::Explicit(spec) => Ok(spec.clone()),
        KernelChoice::MedianHeuristic {
            family,
            subset_size,
        } => {
            let seed = splitmix64(config.master_seed ^ SEED_TAG_BANDWIDTH);
            let scale = match reference {
                Reference::Csv { points, .. } => median_heuristic(points, *subset_size, seed)?,
                Reference::Synthetic(mix) => {
                    let max_n = *config.n_values.last().unwrap();
                    let probe = sample_mixture(mix, max_n.min(10_000), splitmix64(seed))?;
                    median_heuristic(&probe, *subset_size, seed)?
                }
            };
            Ok(family.with_scale(scale)?)
        }
    }
}

fn run_trial(
    config: &ExperimentConfig,
    kernel: &KernelSpec,
    reference: &Reference,
    item: &WorkItem,
) -> std::result::Result<ErrorRecord, Diagnostic> {
    let seed = stable_seed(
        config.master_seed,
        item.n,
        item.estimator.id(),
        item.m,
        item.trial,
    );
    let diag = |message: String| Diagnostic {
        estimator: item.estimator,
        n: item.n,
        m: item.m,
        trial: item.trial,
        message,
    };

    let data_seed = stable_seed(config.master_seed, item.n, STREAM_DATA, 0, item.trial);
    let draw_seed = stable_seed(config.master_seed, item.n, STREAM_DRAW, item.m, item.trial);

    let start = Instant::now();
    let data = match reference {
        Reference::Synthetic(mix) => {
            sample_mixture(mix, item.n, data_seed).map_err(|e| diag(e.to_string()))?
        }
        Reference::Csv { points, .. } => {
            subsample(points, item.n, data_seed).map_err(|e| diag(e.to_string()))?
        }
    };

    let embedding = match item.estimator {
        Estimator::Empirical => empirical_embedding(&data, kernel),
        Estimator::Nystrom => sample_landmarks(item.n, item.m, draw_seed)
            .and_then(|draw| nystrom_embedding(&data, &draw, kernel, DEFAULT_REL_TOL)),
        Estimator::UniformLandmark => sample_landmarks(item.n, item.m, draw_seed)
            .and_then(|draw| uniform_landmark_embedding(&data, &draw, kernel)),
        Estimator::Herding => herding_embedding(&data, kernel, item.m),
    }
    .map_err(|e| diag(e.to_string()))?;

    let error = reference
        .error_of(&embedding)
        .map_err(|e| diag(e.to_string()))?;
    if !(error.is_finite() && error >= 0.0) {
        return Err(diag(format!("non-finite error {error}")));
    }

    let elapsed_ms = match config.timing {
        Timing::Off => 0.0,
        Timing::Wall => start.elapsed().as_secs_f64() * 1e3,
    };

    Ok(ErrorRecord {
        estimator: item.estimator,
        n: item.n,
        m: item.m,
        trial: item.trial,
        seed,
        error,
        elapsed_ms,
    })
}

/// Nearest-rank percentile: the value at rank `ceil(p/100 * len)` (1-based)
/// of the sorted sample.
fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let rank = ((p / 100.0 * sorted.len() as f64).ceil() as usize).max(1);
    sorted[rank.min(sorted.len()) - 1]
}

type SummaryCell = (Estimator, Vec<f64>, f64);

/// Per-(estimator, n, m) mean, 5th and 95th percentile of error, and mean
/// elapsed time.
pub fn summarize(records: &[ErrorRecord]) -> Vec<SummaryRow> {
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<(&str, usize, usize), SummaryCell> = BTreeMap::new();
    for r in records {
        let entry = groups
            .entry((r.estimator.name(), r.n, r.m))
            .or_insert_with(|| (r.estimator, Vec::new(), 0.0));
        entry.1.push(r.error);
        entry.2 += r.elapsed_ms;
    }
    groups
        .into_iter()
        .map(|((_, n, m), (estimator, mut errors, elapsed_total))| {
            let count = errors.len() as f64;
            let mean = errors.iter().sum::<f64>() / count;
            errors.sort_by(|a, b| a.total_cmp(b));
            SummaryRow {
                estimator,
                n,
                m,
                mean,
                p5: nearest_rank(&errors, 5.0),
                p95: nearest_rank(&errors, 95.0),
                mean_elapsed_ms: elapsed_total / count,
            }
        })
        .collect()
}

pub const RECORDS_HEADER: &str = "estimator,n,m,trial,seed,error,elapsed_ms";
pub const SUMMARY_HEADER: &str = "estimator,n,m,mean,p5,p95,mean_elapsed_ms";

/// Renders the records CSV (exact schema, newline-terminated rows).
pub fn records_csv(records: &[ErrorRecord]) -> String {
    let mut out = String::from(RECORDS_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.estimator.name(),
            r.n,
            r.m,
            r.trial,
            r.seed,
            r.error,
            r.elapsed_ms
        ));
    }
    out
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.estimator.name(),
            r.n,
            r.m,
            r.mean,
            r.p5,
            r.p95,
            r.mean_elapsed_ms
        ));
    }
    out
}

pub fn write_records_csv(path: &Path, records: &[ErrorRecord]) -> Result<()> {
    write_text(path, &records_csv(records))
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    write_text(path, &summary_csv(rows))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| BenchError::io(path, e))?;
        }
    }
    let mut f = std::fs::File::create(path).map_err(|e| BenchError::io(path, e))?;
    f.write_all(text.as_bytes())
        .map_err(|e| BenchError::io(path, e))
}

/// Companion summary path: `records.csv` -> `records.summary.csv`.
pub fn summary_path_for(output: &Path) -> PathBuf {
    output.with_extension("summary.csv")
}
