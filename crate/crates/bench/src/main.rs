use std::path::{Path, PathBuf};
use std::process::ExitCode;

use kme_bench::config::ExperimentConfig;
use kme_bench::data::load_csv;
use kme_bench::oracle_check::oracle_check;
use kme_bench::plan::report_plan;
use kme_bench::sweep::{
    run_sweep, summarize, summary_path_for, write_records_csv, write_summary_csv,
};
use kme_core::kernels::{median_heuristic, DEFAULT_MEDIAN_SUBSET};
use kme_core::spectral::{DecayRegime, SpectralProfile, DEFAULT_PROFILE_CAP};
use kme_core::KernelSpec;

const USAGE: &str = "\
Usage: kme-bench <command> [options]

Commands:
  sweep --config <path> [--out <path>] [--threads <k>]
      Run the configured error sweep, writing a records CSV and a
      companion summary CSV (<out>.summary.csv).

  plan --n <int> --delta <real> --regime <poly:GAMMA,C | log:BETA,C> [--data <csv>]
      Report the planned subsample size, its admissibility, and the error
      bound at the planned size. With --data, the spectral profile and
      kernel bandwidth are estimated from the file.

  oracle-check --trials <int> --seed <int> [--samples <int>]
      Cross-validate the closed-form mixture error against the Monte-Carlo
      estimator on random instances (default 1000000 samples per trial).
";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn run(args: &[String]) -> Result<(), String> {
    let Some(command) = args.first() else {
        return Err(format!("missing command\n\n{USAGE}"));
    };
    let rest = &args[1..];
    match command.as_str() {
        "sweep" => cmd_sweep(rest),
        "plan" => cmd_plan(rest),
        "oracle-check" => cmd_oracle_check(rest),
        "--help" | "-h" | "help" => {
            println!("{USAGE}");
            Ok(())
        }
        other => Err(format!("unknown command {other:?}\n\n{USAGE}")),
    }
}

struct Flags<'a> {
    pairs: Vec<(&'a str, &'a str)>,
}

impl<'a> Flags<'a> {
    fn parse(args: &'a [String], allowed: &[&str]) -> Result<Self, String> {
        let mut pairs = Vec::new();
        let mut i = 0;
        while i < args.len() {
            let flag = args[i].as_str();
            if !allowed.contains(&flag) {
                return Err(format!("unknown flag {flag:?}"));
            }
            let value = args
                .get(i + 1)
                .ok_or_else(|| format!("flag {flag} needs a value"))?;
            pairs.push((flag, value.as_str()));
            i += 2;
        }
        Ok(Flags { pairs })
    }

    fn get(&self, flag: &str) -> Option<&str> {
        self.pairs.iter().find(|(f, _)| *f == flag).map(|(_, v)| *v)
    }

    fn require(&self, flag: &str) -> Result<&str, String> {
        self.get(flag).ok_or_else(|| format!("missing flag {flag}"))
    }

    fn parse_value<T: std::str::FromStr>(&self, flag: &str, value: &str) -> Result<T, String> {
        value
            .parse()
            .map_err(|_| format!("invalid value {value:?} for {flag}"))
    }
}

fn cmd_sweep(args: &[String]) -> Result<(), String> {
    let flags = Flags::parse(args, &["--config", "--out", "--threads"])?;
    let config_path = PathBuf::from(flags.require("--config")?);
    let mut config = ExperimentConfig::from_file(&config_path).map_err(|e| e.to_string())?;
    if let Some(out) = flags.get("--out") {
        config.output_path = PathBuf::from(out);
    }
    let threads: usize = match flags.get("--threads") {
        None => 0,
        Some(v) => flags.parse_value("--threads", v)?,
    };

    let output = run_sweep(&config, threads).map_err(|e| e.to_string())?;
    for d in &output.diagnostics {
        eprintln!(
            "trial failed: estimator={} n={} m={} trial={}: {}",
            d.estimator.name(),
            d.n,
            d.m,
            d.trial,
            d.message
        );
    }
    write_records_csv(&config.output_path, &output.records).map_err(|e| e.to_string())?;
    let rows = summarize(&output.records);
    let summary_path = summary_path_for(&config.output_path);
    write_summary_csv(&summary_path, &rows).map_err(|e| e.to_string())?;

    println!(
        "wrote {} records to {}",
        output.records.len(),
        config.output_path.display()
    );
    println!(
        "wrote {} summary rows to {}",
        rows.len(),
        summary_path.display()
    );
    if !output.diagnostics.is_empty() {
        println!("{} trials failed (see stderr)", output.diagnostics.len());
    }
    Ok(())
}

fn parse_regime(spec: &str) -> Result<DecayRegime, String> {
    let (kind, params) = spec
        .split_once(':')
        .ok_or_else(|| format!("regime {spec:?} must look like poly:GAMMA,C or log:BETA,C"))?;
    let (a, b) = params
        .split_once(',')
        .ok_or_else(|| format!("regime {spec:?} needs two comma-separated parameters"))?;
    let a: f64 = a
        .trim()
        .parse()
        .map_err(|_| format!("invalid regime parameter {a:?}"))?;
    let b: f64 = b
        .trim()
        .parse()
        .map_err(|_| format!("invalid regime parameter {b:?}"))?;
    let regime = match kind {
        "poly" | "polynomial" => DecayRegime::polynomial(a, b),
        "log" | "logarithmic" => DecayRegime::logarithmic(a, b),
        other => return Err(format!("unknown regime kind {other:?} (poly | log)")),
    };
    regime.map_err(|e| e.to_string())
}

fn cmd_plan(args: &[String]) -> Result<(), String> {
    let flags = Flags::parse(args, &["--n", "--delta", "--regime", "--data"])?;
    let n: usize = flags.parse_value("--n", flags.require("--n")?)?;
    let delta: f64 = flags.parse_value("--delta", flags.require("--delta")?)?;
    let regime = parse_regime(flags.require("--regime")?)?;

    let profile = match flags.get("--data") {
        None => None,
        Some(path) => {
            let points = load_csv(Path::new(path), 100_000, 0).map_err(|e| e.to_string())?;
            let bandwidth =
                median_heuristic(&points, DEFAULT_MEDIAN_SUBSET, 0).map_err(|e| e.to_string())?;
            let kernel = KernelSpec::gaussian(bandwidth).map_err(|e| e.to_string())?;
            println!(
                "data: {} points, median-heuristic bandwidth {bandwidth}",
                points.len()
            );
            Some(
                SpectralProfile::from_points(&kernel, &points, DEFAULT_PROFILE_CAP, 0)
                    .map_err(|e| e.to_string())?,
            )
        }
    };

    let report = report_plan(n, delta, &regime, profile.as_ref()).map_err(|e| e.to_string())?;
    print!("{report}");
    Ok(())
}

fn cmd_oracle_check(args: &[String]) -> Result<(), String> {
    let flags = Flags::parse(args, &["--trials", "--seed", "--samples"])?;
    let trials: usize = flags.parse_value("--trials", flags.require("--trials")?)?;
    let seed: u64 = flags.parse_value("--seed", flags.require("--seed")?)?;
    let samples: usize = match flags.get("--samples") {
        None => 1_000_000,
        Some(v) => flags.parse_value("--samples", v)?,
    };
    if trials == 0 {
        return Err("--trials must be at least 1".to_string());
    }

    let report = oracle_check(trials, samples, seed).map_err(|e| e.to_string())?;
    for (i, t) in report.trials.iter().enumerate() {
        println!(
            "trial {:>3}: d={} p={} atoms={:>2} exact={:.6} mc={:.6} se={:.2e} {}",
            i,
            t.dim,
            t.components,
            t.atoms,
            t.exact,
            t.mc_estimate,
            t.mc_std_error,
            if t.within_four_se { "ok" } else { "MISS" }
        );
    }
    println!(
        "agreement within 4 standard errors: {}/{}",
        report.hits,
        report.trials.len()
    );
    if report.passed() {
        Ok(())
    } else {
        Err("oracle cross-validation failed".to_string())
    }
}
