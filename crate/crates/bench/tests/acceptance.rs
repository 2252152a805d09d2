//! Acceptance suite: one pass/fail line per criterion, all run in order.
//!
//! Run with `cargo test -p kme-bench --test acceptance -- --nocapture`.

use std::path::PathBuf;
use std::time::Instant;

use kme_bench::config::{
    DatasetConfig, Estimator, ExperimentConfig, KernelChoice, RadialFamily, Timing,
};
use kme_bench::oracle_check::oracle_check;
use kme_bench::sweep::{run_sweep, summarize};
use kme_core::embedding::{
    empirical_embedding, nystrom_embedding, rkhs_distance, rkhs_norm_sq, sample_landmarks,
    uniform_landmark_embedding, LandmarkDraw,
};
use kme_core::kernels::{median_heuristic, KernelSpec};
use kme_core::oracle::{exact_error, sample_mixture, GaussianMixture};
use kme_core::psd_linalg::{pinv_psd, PsdEigen, SymMatrix, DEFAULT_REL_TOL};
use kme_core::spectral::{
    admissible_m, effective_dimension, plan_subsample_size, theorem_bound, DecayRegime,
    SpectralProfile,
};
use kme_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Criterion {
    index: usize,
    name: &'static str,
    passed: bool,
    detail: String,
    seconds: f64,
}

fn run_criterion(
    index: usize,
    name: &'static str,
    f: impl FnOnce() -> (bool, String),
) -> Criterion {
    let start = Instant::now();
    let (passed, detail) = f();
    Criterion {
        index,
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn random_mixture(seed: u64, d: usize, p: usize, spread: f64) -> GaussianMixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..d).map(|_| rng.gen_range(-spread..spread)).collect())
        .collect();
    GaussianMixture::uniform_isotropic(centers).unwrap()
}

/// 1. Closed-form error vs Monte-Carlo cross-validation on 20 random
///    instances, 10^6 samples each, within 4 standard errors in >= 19/20.
fn c01_oracle_cross_validation() -> (bool, String) {
    let start = Instant::now();
    let report = oracle_check(20, 1_000_000, 20251).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let ok = report.hits >= 19 && secs < 120.0;
    (
        ok,
        format!(
            "{}/20 within 4 std errors, {:.0}s (budget 120s)",
            report.hits, secs
        ),
    )
}

/// 2. Projection identity at m = n distinct points: the Nyström embedding
///    coincides with the empirical one.
fn c02_projection_identity() -> (bool, String) {
    let mix = random_mixture(2_001, 5, 3, 3.0);
    let x = sample_mixture(&mix, 200, 42).unwrap();
    let bw = median_heuristic(&x, 1000, 0).unwrap();
    let kernel = KernelSpec::gaussian(bw).unwrap();
    let emp = empirical_embedding(&x, &kernel).unwrap();
    let draw = LandmarkDraw::from_indices((0..200).collect(), 0);
    let nys = nystrom_embedding(&x, &draw, &kernel, DEFAULT_REL_TOL).unwrap();

    let dist = rkhs_distance(&emp, &nys).unwrap();
    let norm = rkhs_norm_sq(&emp).sqrt();
    let e_emp = exact_error(&mix, &emp).unwrap();
    let e_nys = exact_error(&mix, &nys).unwrap();
    let rel = (e_emp - e_nys).abs() / e_emp;
    let ok = dist <= 1e-6 * norm && rel <= 1e-6;
    (
        ok,
        format!(
            "distance {dist:.2e} vs 1e-6*||mu_hat|| = {:.2e}, exact-error rel diff {rel:.2e}",
            1e-6 * norm
        ),
    )
}

/// 3. Projection optimality: Nyström never loses to uniform weights on the
///    same draw, 500/500 seeded trials.
fn c03_projection_optimality() -> (bool, String) {
    let mix = random_mixture(3_001, 2, 3, 3.0);
    let kernel = KernelSpec::gaussian(1.1).unwrap();
    let mut wins = 0;
    let trials = 500;
    for t in 0..trials {
        let x = sample_mixture(&mix, 500, 30_000 + t as u64).unwrap();
        let m = [5usize, 20, 50][t % 3];
        let draw = sample_landmarks(500, m, 40_000 + t as u64).unwrap();
        let emp = empirical_embedding(&x, &kernel).unwrap();
        let nys = nystrom_embedding(&x, &draw, &kernel, DEFAULT_REL_TOL).unwrap();
        let unif = uniform_landmark_embedding(&x, &draw, &kernel).unwrap();
        let e_nys = rkhs_distance(&emp, &nys).unwrap();
        let e_unif = rkhs_distance(&emp, &unif).unwrap();
        if e_nys <= e_unif + 1e-8 {
            wins += 1;
        }
    }
    (wins == trials, format!("{wins}/{trials} trials"))
}

/// 4. Empirical-estimator rate: log-log slope of mean error vs n in
///    [-0.65, -0.35] over 50 trials at n in {100, 1000, 10000}.
fn c04_rate_check() -> (bool, String) {
    let start = Instant::now();
    let config = ExperimentConfig {
        dataset: DatasetConfig::Synthetic {
            d: 10,
            p: 8,
            center_scale: 5.0,
        },
        kernel: KernelChoice::MedianHeuristic {
            family: RadialFamily::Gaussian,
            subset_size: 1000,
        },
        n_values: vec![100, 1000, 10_000],
        m_grid: vec![],
        estimators: vec![Estimator::Empirical],
        trials: 50,
        delta: 0.1,
        master_seed: 9_101,
        output_path: PathBuf::from("unused.csv"),
        timing: Timing::Off,
    };
    let out = run_sweep(&config, 0).unwrap();
    assert!(out.diagnostics.is_empty());
    let rows = summarize(&out.records);
    let points: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((r.n as f64).ln(), r.mean.ln()))
        .collect();
    let xbar = points.iter().map(|p| p.0).sum::<f64>() / points.len() as f64;
    let ybar = points.iter().map(|p| p.1).sum::<f64>() / points.len() as f64;
    let slope = points
        .iter()
        .map(|p| (p.0 - xbar) * (p.1 - ybar))
        .sum::<f64>()
        / points.iter().map(|p| (p.0 - xbar).powi(2)).sum::<f64>();
    let secs = start.elapsed().as_secs_f64();
    let ok = (-0.65..=-0.35).contains(&slope) && secs < 600.0;
    (
        ok,
        format!("slope {slope:.3} (target [-0.65, -0.35]), {secs:.0}s (budget 600s)"),
    )
}

/// 5. Figure-1 protocol at desk scale: Nyström mean error non-increasing in
///    m (1.05x slack) and within factor 2 of the empirical mean at the
///    planned subsample size 691.
fn c05_error_vs_m_protocol() -> (bool, String) {
    let regime = DecayRegime::logarithmic(1.0, 6.0).unwrap();
    let planned = plan_subsample_size(10_000, 0.1, &regime, 1.0).unwrap();
    if planned != 691 {
        return (false, format!("planned m = {planned}, expected 691"));
    }
    let grid = [16usize, 32, 64, 128, 256, 512, 1024];
    let config = ExperimentConfig {
        dataset: DatasetConfig::Synthetic {
            d: 10,
            p: 8,
            center_scale: 5.0,
        },
        kernel: KernelChoice::MedianHeuristic {
            family: RadialFamily::Gaussian,
            subset_size: 1000,
        },
        n_values: vec![10_000],
        m_grid: vec![16, 32, 64, 128, 256, 512, 691, 1024],
        estimators: vec![Estimator::Empirical, Estimator::Nystrom],
        trials: 20,
        delta: 0.1,
        master_seed: 777,
        output_path: PathBuf::from("unused.csv"),
        timing: Timing::Off,
    };
    let out = run_sweep(&config, 0).unwrap();
    assert!(out.diagnostics.is_empty());
    let rows = summarize(&out.records);
    let mean_of = |est: Estimator, m: usize| -> f64 {
        rows.iter()
            .find(|r| r.estimator == est && r.m == m)
            .map(|r| r.mean)
            .unwrap()
    };

    let mut monotone = true;
    for w in grid.windows(2) {
        let prev = mean_of(Estimator::Nystrom, w[0]);
        let next = mean_of(Estimator::Nystrom, w[1]);
        if next > 1.05 * prev {
            monotone = false;
        }
    }
    let emp = mean_of(Estimator::Empirical, 0);
    let at_planned = mean_of(Estimator::Nystrom, 691);
    let ratio = at_planned / emp;
    let ok = monotone && (0.5..=2.0).contains(&ratio);
    (
        ok,
        format!("monotone grid: {monotone}, nystrom(691)/empirical = {ratio:.3}"),
    )
}

fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(a.rows(), b.cols());
    for i in 0..a.rows() {
        for k in 0..a.cols() {
            let aik = a[(i, k)];
            for j in 0..b.cols() {
                out[(i, j)] += aik * b[(k, j)];
            }
        }
    }
    out
}

fn frob_diff(a: &Matrix, b: &Matrix) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let d = a[(i, j)] - b[(i, j)];
            acc += d * d;
        }
    }
    acc.sqrt()
}

/// 6. Moore-Penrose identities on 200 random PSD matrices of order <= 100,
///    including 50 rank-deficient ones with duplicated rows/columns.
fn c06_moore_penrose_suite() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(6_001);
    let mut failures = 0;
    let mut deficient = 0;
    for t in 0..200usize {
        let order = rng.gen_range(2..=100);
        let rank_deficient = t % 4 == 0;
        let k = if rank_deficient {
            deficient += 1;
            (order / 2).max(1)
        } else {
            order + 3
        };
        let mut b: Vec<Vec<f64>> = (0..order)
            .map(|_| (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        if rank_deficient && order >= 2 {
            // Duplicated factor rows give duplicated rows and columns of A.
            let src = rng.gen_range(0..order);
            let dst = (src + 1) % order;
            b[dst] = b[src].clone();
        }
        let mut a = Matrix::zeros(order, order);
        for i in 0..order {
            for j in i..order {
                let v: f64 = (0..k).map(|s| b[i][s] * b[j][s]).sum();
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        let sym = SymMatrix::new(a.clone()).unwrap();
        let op_norm = PsdEigen::new(&sym).unwrap().eigenvalues()[0];
        let pinv = pinv_psd(&sym, DEFAULT_REL_TOL).unwrap();
        let p = pinv.as_matrix();

        let ap = mat_mul(&a, p);
        let pa = mat_mul(p, &a);
        let tol = 1e-6 * op_norm;
        let ok = frob_diff(&mat_mul(&ap, &a), &a) <= tol
            && frob_diff(&mat_mul(&pa, p), p) <= tol
            && frob_diff(&ap, &ap.transpose()) <= tol
            && frob_diff(&pa, &pa.transpose()) <= tol;
        if !ok {
            failures += 1;
        }
    }
    (
        failures == 0 && deficient == 50,
        format!("{failures} failures over 200 matrices ({deficient} rank-deficient)"),
    )
}

/// 7. Theorem bound dominates the observed exact error in >= 99% of 200
///    admissible synthetic trials.
fn c07_bound_sanity() -> (bool, String) {
    let mix = random_mixture(7_001, 3, 4, 2.5);
    let probe = sample_mixture(&mix, 2000, 7_002).unwrap();
    let bw = median_heuristic(&probe, 1000, 7_003).unwrap();
    let kernel = KernelSpec::gaussian(bw).unwrap();
    let profile_points = sample_mixture(&mix, 1500, 7_004).unwrap();
    let profile = SpectralProfile::from_points(&kernel, &profile_points, 1500, 0).unwrap();
    let c_norm = profile.top_eigenvalue();

    for &m in &[590usize, 620] {
        match admissible_m(m, 0.1, 1.0, c_norm) {
            Ok(true) => {}
            other => {
                return (
                    false,
                    format!("m = {m} not admissible (||C|| = {c_norm:.3}): {other:?}"),
                );
            }
        }
    }

    let mut dominated = 0;
    let trials = 200;
    for t in 0..trials {
        let n = [1000usize, 3000][(t / 2) % 2];
        let m = [590usize, 620][t % 2];
        let x = sample_mixture(&mix, n, 70_000 + t as u64).unwrap();
        let draw = sample_landmarks(n, m, 80_000 + t as u64).unwrap();
        let nys = nystrom_embedding(&x, &draw, &kernel, DEFAULT_REL_TOL).unwrap();
        let observed = exact_error(&mix, &nys).unwrap();
        let bound = theorem_bound(n, m, 0.1, &profile).unwrap();
        if bound >= observed {
            dominated += 1;
        }
    }
    (
        dominated * 100 >= trials * 99,
        format!("bound dominated error in {dominated}/{trials} trials"),
    )
}

/// 8. Byte-identical sweep output across thread counts (CLI round trip).
fn c08_determinism() -> (bool, String) {
    let dir = std::env::temp_dir().join(format!("kme-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let config_path = dir.join("sweep.txt");
    std::fs::write(
        &config_path,
        "dataset.type = synthetic\n\
         dataset.d = 3\n\
         dataset.p = 2\n\
         dataset.center_scale = 4\n\
         kernel.family = gaussian\n\
         kernel.bandwidth = median\n\
         sweep.n = 300,500\n\
         sweep.m = 8,32\n\
         estimators = empirical,nystrom,uniform_landmark,herding\n\
         trials = 6\n\
         delta = 0.1\n\
         seed = 2024\n",
    )
    .unwrap();

    let bin = env!("CARGO_BIN_EXE_kme-bench");
    let mut outputs = Vec::new();
    for (threads, tag) in [("1", "a"), ("3", "b")] {
        let out_path = dir.join(format!("{tag}.csv"));
        let status = std::process::Command::new(bin)
            .args([
                "sweep",
                "--config",
                config_path.to_str().unwrap(),
                "--out",
                out_path.to_str().unwrap(),
                "--threads",
                threads,
            ])
            .output()
            .unwrap();
        if !status.status.success() {
            return (
                false,
                format!("sweep failed: {}", String::from_utf8_lossy(&status.stderr)),
            );
        }
        let records = std::fs::read(&out_path).unwrap();
        let summary = std::fs::read(dir.join(format!("{tag}.summary.csv"))).unwrap();
        outputs.push((records, summary));
    }
    let same_records = outputs[0].0 == outputs[1].0;
    let same_summary = outputs[0].1 == outputs[1].1;
    std::fs::remove_dir_all(&dir).ok();
    (
        same_records && same_summary,
        format!(
            "records identical: {same_records}, summaries identical: {same_summary} \
             ({} bytes)",
            outputs[0].0.len()
        ),
    )
}

/// 9. Effective dimension on analytic spectra: matches high-precision
///    summation, strictly decreasing, with lambda * N(lambda) non-decreasing.
fn c09_effective_dimension_suite() -> (bool, String) {
    fn kahan_sum(eigs: &[f64], lambda: f64) -> f64 {
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for &s in eigs {
            let term = s / (s + lambda);
            let y = term - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        sum
    }

    let flat: Vec<f64> = vec![0.02; 50];
    let geometric: Vec<f64> = (1..=60).map(|i| 2.0f64.powi(-i)).collect();
    let polynomial: Vec<f64> = (1..=1000).map(|i| 1.0 / (i as f64 * i as f64)).collect();
    let spectra: Vec<(&str, Vec<f64>, f64)> = vec![
        ("flat", flat, 1.0),
        ("geometric", geometric, 1.0),
        ("polynomial", polynomial, 1.3),
    ];

    let lambdas: Vec<f64> = (0..60)
        .map(|k| 10f64.powf(-4.0 + 6.0 * k as f64 / 59.0))
        .collect();
    for (name, eigs, k_bound) in &spectra {
        let profile = SpectralProfile::from_eigenvalues(eigs.clone(), *k_bound).unwrap();
        let mut prev = f64::INFINITY;
        let mut prev_ln = -f64::INFINITY;
        for &lambda in &lambdas {
            let got = effective_dimension(&profile, lambda).unwrap();
            let want = kahan_sum(profile.eigenvalues(), lambda);
            if (got - want).abs() > 1e-10 * want {
                return (
                    false,
                    format!("{name}: {got} vs oracle {want} at lambda {lambda}"),
                );
            }
            if got >= prev {
                return (
                    false,
                    format!("{name}: not strictly decreasing at lambda {lambda}"),
                );
            }
            let ln = lambda * got;
            if ln < prev_ln - 1e-12 {
                return (
                    false,
                    format!("{name}: lambda*N decreasing at lambda {lambda}"),
                );
            }
            prev = got;
            prev_ln = ln;
        }
    }
    (true, "3 spectra x 60 lambdas, all checks hold".to_string())
}

/// 10. MMD reverse-triangle relation on 100 paired-sample instances.
fn c10_mmd_triangle() -> (bool, String) {
    let kernel = KernelSpec::gaussian(1.0).unwrap();
    let mut holds = 0;
    let instances = 100;
    for t in 0..instances {
        let mix1 = random_mixture(100_000 + t as u64, 2, 3, 3.0);
        let mix2 = random_mixture(200_000 + t as u64, 2, 3, 3.0);
        let x1 = sample_mixture(&mix1, 250, 300_000 + t as u64).unwrap();
        let x2 = sample_mixture(&mix2, 180, 400_000 + t as u64).unwrap();
        let a = empirical_embedding(&x1, &kernel).unwrap();
        let b = empirical_embedding(&x2, &kernel).unwrap();
        let pa = nystrom_embedding(
            &x1,
            &sample_landmarks(250, 15, 500_000 + t as u64).unwrap(),
            &kernel,
            DEFAULT_REL_TOL,
        )
        .unwrap();
        let pb = nystrom_embedding(
            &x2,
            &sample_landmarks(180, 15, 600_000 + t as u64).unwrap(),
            &kernel,
            DEFAULT_REL_TOL,
        )
        .unwrap();
        let mmd = rkhs_distance(&a, &b).unwrap();
        let mmd_hat = rkhs_distance(&pa, &pb).unwrap();
        let slack = rkhs_distance(&a, &pa).unwrap() + rkhs_distance(&b, &pb).unwrap();
        if (mmd - mmd_hat).abs() <= slack + 1e-8 {
            holds += 1;
        }
    }
    (holds == instances, format!("{holds}/{instances} instances"))
}

#[test]
fn acceptance_suite() {
    let results = vec![
        run_criterion(1, "oracle cross-validation", c01_oracle_cross_validation),
        run_criterion(2, "projection identity at m = n", c02_projection_identity),
        run_criterion(3, "projection optimality", c03_projection_optimality),
        run_criterion(4, "empirical rate check", c04_rate_check),
        run_criterion(5, "error-vs-m protocol", c05_error_vs_m_protocol),
        run_criterion(6, "Moore-Penrose suite", c06_moore_penrose_suite),
        run_criterion(7, "bound sanity", c07_bound_sanity),
        run_criterion(8, "sweep determinism", c08_determinism),
        run_criterion(
            9,
            "effective-dimension suite",
            c09_effective_dimension_suite,
        ),
        run_criterion(10, "MMD triangle relation", c10_mmd_triangle),
    ];

    let mut failed = Vec::new();
    for r in &results {
        println!(
            "criterion {:02} [{}]: {} ({:.1}s) - {}",
            r.index,
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.seconds,
            r.detail
        );
        if !r.passed {
            failed.push(format!("{:02} {}: {}", r.index, r.name, r.detail));
        }
    }
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}
