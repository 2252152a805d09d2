//! Declarative sweep configuration: a flat key-value text file plus CLI
//! overrides (flags win).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use kme_core::KernelSpec;

use crate::error::{BenchError, Result};

pub const DEFAULT_CSV_LIMIT: usize = 100_000;
pub const DEFAULT_CENTER_SCALE: f64 = 5.0;

/// Estimators the sweep can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Estimator {
    Empirical,
    Nystrom,
    UniformLandmark,
    Herding,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::Empirical => "empirical",
            Estimator::Nystrom => "nystrom",
            Estimator::UniformLandmark => "uniform_landmark",
            Estimator::Herding => "herding",
        }
    }

    /// Stable numeric id, part of the per-trial seed derivation.
    pub fn id(self) -> u64 {
        match self {
            Estimator::Empirical => 0,
            Estimator::Nystrom => 1,
            Estimator::UniformLandmark => 2,
            Estimator::Herding => 3,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "empirical" => Some(Estimator::Empirical),
            "nystrom" => Some(Estimator::Nystrom),
            "uniform_landmark" => Some(Estimator::UniformLandmark),
            "herding" => Some(Estimator::Herding),
            _ => None,
        }
    }

    /// Uses the landmark grid (true) or runs once per (n, trial) with m = 0.
    pub fn uses_m_grid(self) -> bool {
        !matches!(self, Estimator::Empirical)
    }
}

#[derive(Clone, Debug)]
pub enum DatasetConfig {
    Synthetic {
        d: usize,
        p: usize,
        center_scale: f64,
    },
    Csv {
        path: PathBuf,
        limit: usize,
    },
}

/// Kernel family for median-heuristic bandwidth selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RadialFamily {
    Gaussian,
    Laplacian,
}

impl RadialFamily {
    pub fn with_scale(self, scale: f64) -> kme_core::Result<KernelSpec> {
        match self {
            RadialFamily::Gaussian => KernelSpec::gaussian(scale),
            RadialFamily::Laplacian => KernelSpec::laplacian(scale),
        }
    }
}

#[derive(Clone, Debug)]
pub enum KernelChoice {
    Explicit(KernelSpec),
    MedianHeuristic {
        family: RadialFamily,
        subset_size: usize,
    },
}

/// Whether per-trial wall time is recorded. `Off` writes 0 for every
/// elapsed_ms field, keeping output byte-identical across runs and thread
/// counts; `Wall` records real times and gives up that reproducibility.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Timing {
    Off,
    Wall,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    pub kernel: KernelChoice,
    pub n_values: Vec<usize>,
    pub m_grid: Vec<usize>,
    pub estimators: Vec<Estimator>,
    pub trials: usize,
    pub delta: f64,
    pub master_seed: u64,
    pub output_path: PathBuf,
    pub timing: Timing,
}

impl ExperimentConfig {
    /// Parses the flat key-value format (`key = value`, `#` comments) and
    /// validates the result.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(BenchError::parse(
                    path,
                    idx + 1,
                    format!("expected `key = value`, got {line:?}"),
                ));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if map.insert(key.clone(), (value, idx + 1)).is_some() {
                return Err(BenchError::parse(
                    path,
                    idx + 1,
                    format!("duplicate key {key}"),
                ));
            }
        }
        Self::from_map(path, map)
    }

    fn from_map(path: &Path, mut map: BTreeMap<String, (String, usize)>) -> Result<Self> {
        let mut take = |key: &str| map.remove(key);
        let parse_err =
            |line: usize, msg: String| -> BenchError { BenchError::parse(path, line, msg) };

        let dataset = {
            let (ty, line) = take("dataset.type")
                .ok_or_else(|| BenchError::config("missing key dataset.type"))?;
            match ty.as_str() {
                "synthetic" => {
                    let d = parse_field(&mut take, "dataset.d", path)?
                        .ok_or_else(|| BenchError::config("synthetic dataset needs dataset.d"))?;
                    let p = parse_field(&mut take, "dataset.p", path)?
                        .ok_or_else(|| BenchError::config("synthetic dataset needs dataset.p"))?;
                    let center_scale: f64 = parse_field(&mut take, "dataset.center_scale", path)?
                        .unwrap_or(DEFAULT_CENTER_SCALE);
                    DatasetConfig::Synthetic { d, p, center_scale }
                }
                "csv" => {
                    let (p, _) = take("dataset.path")
                        .ok_or_else(|| BenchError::config("csv dataset needs dataset.path"))?;
                    let limit: usize =
                        parse_field(&mut take, "dataset.limit", path)?.unwrap_or(DEFAULT_CSV_LIMIT);
                    DatasetConfig::Csv {
                        path: PathBuf::from(p),
                        limit,
                    }
                }
                other => {
                    return Err(parse_err(line, format!("unknown dataset.type {other:?}")));
                }
            }
        };

        let family = take("kernel.family");
        let bandwidth = take("kernel.bandwidth");
        let kernel = parse_kernel(path, family, bandwidth)?;

        let n_values: Vec<usize> = parse_list(&mut take, "sweep.n", path)?
            .ok_or_else(|| BenchError::config("missing key sweep.n"))?;
        let m_grid: Vec<usize> = parse_list(&mut take, "sweep.m", path)?.unwrap_or_default();

        let estimators = match take("estimators") {
            None => vec![Estimator::Empirical, Estimator::Nystrom],
            Some((v, line)) => {
                let mut out = Vec::new();
                for name in v.split(',') {
                    let name = name.trim();
                    let est = Estimator::parse(name)
                        .ok_or_else(|| parse_err(line, format!("unknown estimator {name:?}")))?;
                    if !out.contains(&est) {
                        out.push(est);
                    }
                }
                out
            }
        };

        let trials: usize = parse_field(&mut take, "trials", path)?.unwrap_or(1);
        let delta: f64 = parse_field(&mut take, "delta", path)?.unwrap_or(0.1);
        let master_seed: u64 = parse_field(&mut take, "seed", path)?.unwrap_or(0);
        let output_path = take("output")
            .map(|(v, _)| PathBuf::from(v))
            .unwrap_or_else(|| PathBuf::from("records.csv"));

        let timing = match take("timing") {
            None => Timing::Off,
            Some((v, line)) => match v.as_str() {
                "off" => Timing::Off,
                "wall" => Timing::Wall,
                other => {
                    return Err(parse_err(line, format!("unknown timing mode {other:?}")));
                }
            },
        };

        if let Some((key, (_, line))) = map.into_iter().next() {
            return Err(parse_err(line, format!("unknown key {key:?}")));
        }

        let config = ExperimentConfig {
            dataset,
            kernel,
            n_values,
            m_grid,
            estimators,
            trials,
            delta,
            master_seed,
            output_path,
            timing,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() {
            return Err(BenchError::config("sweep.n must be non-empty"));
        }
        if self.n_values.contains(&0) {
            return Err(BenchError::config("sweep.n entries must be positive"));
        }
        if !self.n_values.windows(2).all(|w| w[0] <= w[1]) {
            return Err(BenchError::config("sweep.n must be sorted ascending"));
        }
        if self.estimators.is_empty() {
            return Err(BenchError::config("estimators must be non-empty"));
        }
        let needs_grid = self.estimators.iter().any(|e| e.uses_m_grid());
        if needs_grid && self.m_grid.is_empty() {
            return Err(BenchError::config(
                "sweep.m must be non-empty for landmark-based estimators",
            ));
        }
        let min_n = *self.n_values.first().unwrap();
        if let Some(&bad) = self.m_grid.iter().find(|&&m| m == 0 || m > min_n) {
            return Err(BenchError::config(format!(
                "sweep.m entry {bad} must lie in [1, min(sweep.n) = {min_n}]"
            )));
        }
        if self.trials == 0 {
            return Err(BenchError::config("trials must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(BenchError::config("delta must lie in (0, 1)"));
        }
        if matches!(self.dataset, DatasetConfig::Synthetic { .. }) {
            let gaussian_ok = match &self.kernel {
                KernelChoice::Explicit(KernelSpec::Gaussian { .. }) => true,
                KernelChoice::Explicit(_) => false,
                KernelChoice::MedianHeuristic { family, .. } => *family == RadialFamily::Gaussian,
            };
            if !gaussian_ok {
                return Err(BenchError::config(
                    "synthetic sweeps need the gaussian kernel (the exact error oracle \
                     has closed forms only there)",
                ));
            }
        }
        if let DatasetConfig::Synthetic { d, p, center_scale } = self.dataset {
            if d == 0 || p == 0 {
                return Err(BenchError::config(
                    "dataset.d and dataset.p must be positive",
                ));
            }
            if !(center_scale.is_finite() && center_scale >= 0.0) {
                return Err(BenchError::config("dataset.center_scale must be >= 0"));
            }
        }
        Ok(())
    }
}

fn parse_kernel(
    path: &Path,
    family: Option<(String, usize)>,
    bandwidth: Option<(String, usize)>,
) -> Result<KernelChoice> {
    let family_name = family
        .as_ref()
        .map(|(v, _)| v.as_str())
        .unwrap_or("gaussian");
    let (bw, bw_line) = match bandwidth {
        None => ("median".to_string(), 0),
        Some((v, l)) => (v, l),
    };
    if bw == "median" || bw.starts_with("median:") {
        let subset_size = match bw.strip_prefix("median:") {
            None => kme_core::kernels::DEFAULT_MEDIAN_SUBSET,
            Some(rest) => rest.parse().map_err(|_| {
                BenchError::parse(path, bw_line, format!("invalid median subset {rest:?}"))
            })?,
        };
        let family = match family_name {
            "gaussian" => RadialFamily::Gaussian,
            "laplacian" => RadialFamily::Laplacian,
            other => {
                return Err(BenchError::config(format!(
                    "median bandwidth applies to gaussian or laplacian kernels, not {other}"
                )));
            }
        };
        return Ok(KernelChoice::MedianHeuristic {
            family,
            subset_size,
        });
    }
    let value: f64 = bw
        .parse()
        .map_err(|_| BenchError::parse(path, bw_line, format!("invalid bandwidth {bw:?}")))?;
    let spec = match family_name {
        "gaussian" => KernelSpec::gaussian(value)?,
        "laplacian" => KernelSpec::laplacian(value)?,
        other => {
            return Err(BenchError::config(format!(
                "unknown kernel.family {other:?} (gaussian | laplacian)"
            )));
        }
    };
    Ok(KernelChoice::Explicit(spec))
}

fn parse_field<T: std::str::FromStr>(
    take: &mut impl FnMut(&str) -> Option<(String, usize)>,
    key: &str,
    path: &Path,
) -> Result<Option<T>> {
    match take(key) {
        None => Ok(None),
        Some((v, line)) => v
            .parse::<T>()
            .map(Some)
            .map_err(|_| BenchError::parse(path, line, format!("invalid value {v:?} for {key}"))),
    }
}

fn parse_list<T: std::str::FromStr>(
    take: &mut impl FnMut(&str) -> Option<(String, usize)>,
    key: &str,
    path: &Path,
) -> Result<Option<Vec<T>>> {
    match take(key) {
        None => Ok(None),
        Some((v, line)) => {
            let mut out = Vec::new();
            for item in v.split(',') {
                let item = item.trim();
                out.push(item.parse::<T>().map_err(|_| {
                    BenchError::parse(path, line, format!("invalid entry {item:?} in {key}"))
                })?);
            }
            Ok(Some(out))
        }
    }
}
