//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//! Run with `cargo test --test acceptance`.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use alignlab::divergence::{jsd, GridDensity};
use alignlab::experiments::{
    run_gradient_audit, run_mcs_sweep, run_toy_training, run_translation_density, write_report,
    ExperimentConfig, ExperimentReport, ReportFormat,
};
use alignlab::gradients::{
    w1_value_and_gradient, w2sq_value_and_gradient, weight_factors, GeneratorFamily,
};
use alignlab::transport::{
    brute_force_ot, cost_matrix, solve_exact, EmpiricalDistribution, Ground,
};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0;

struct Outcome {
    passed: bool,
    detail: String,
}

fn ot_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut solved = 0;
    for _ in 0..100 {
        let n = rng.random_range(1..=7);
        let d = rng.random_range(1..=3);
        let mut cloud = || {
            let v = (0..n * d).map(|_| rng.random_range(-5.0..5.0)).collect();
            EmpiricalDistribution::uniform(Array2::from_shape_vec((n, d), v).unwrap()).unwrap()
        };
        let (p, q) = (cloud(), cloud());
        for ground in [Ground::Euclidean, Ground::L1] {
            for order in [1, 2] {
                let cost = cost_matrix(&p, &q, ground, order).unwrap();
                let (_, exact) = solve_exact(&p, &q, &cost).unwrap();
                let brute = brute_force_ot(&p, &q, &cost).unwrap();
                worst = worst.max((exact - brute).abs() / brute.max(1.0));
                solved += 1;
            }
        }
    }
    Outcome {
        passed: worst <= 1e-9,
        detail: format!("{solved} solves, worst scaled gap {worst:e}"),
    }
}

fn disjoint_jsd() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for k in 0..20 {
        let shape = if k % 2 == 0 {
            vec![rng.random_range(2..200)]
        } else {
            vec![rng.random_range(2..30), rng.random_range(2..30)]
        };
        let bounds = vec![(0.0, 1.0); shape.len()];
        let cells: usize = shape.iter().product();
        // Each cell goes to P, to Q or to neither; force one cell each.
        let mut p = vec![0.0; cells];
        let mut q = vec![0.0; cells];
        for i in 0..cells {
            match rng.random_range(0..3) {
                0 => p[i] = rng.random::<f64>(),
                1 => q[i] = rng.random::<f64>(),
                _ => {}
            }
        }
        p[0] = 1.0;
        q[0] = 0.0;
        q[cells - 1] = 1.0;
        p[cells - 1] = 0.0;
        let p = GridDensity::from_unnormalized(bounds.clone(), shape.clone(), p).unwrap();
        let q = GridDensity::from_unnormalized(bounds, shape, q).unwrap();
        worst = worst.max((jsd(&p, &q).unwrap() - LN_2).abs());
    }
    Outcome {
        passed: worst <= 1e-12,
        detail: format!("20 pairs, worst |JSD - ln 2| {worst:e}"),
    }
}

fn verdicts_of(r: &ExperimentReport) -> Outcome {
    let failed: Vec<&str> = r
        .verdicts
        .iter()
        .filter(|v| !v.passed)
        .map(|v| v.name.as_str())
        .collect();
    let detail = r
        .verdicts
        .iter()
        .map(|v| format!("{}: {}", v.name, v.detail))
        .collect::<Vec<_>>()
        .join("; ");
    Outcome {
        passed: !r.verdicts.is_empty() && failed.is_empty(),
        detail: if failed.is_empty() {
            detail
        } else {
            format!("failed {failed:?}; {detail}")
        },
    }
}

fn weight_monotonicity() -> Outcome {
    // q is constant on the first `k` cells while p_r increases across them,
    // from below q to above it. The last cell of each grid takes the slack.
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut checked = 0;
    let mut violations = 0;
    for _ in 0..200 {
        let k = rng.random_range(2..40);
        let q = rng.random_range(0.1..0.5) / k as f64;
        let mut p: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..2.0) * q).collect();
        p.sort_by(f64::total_cmp);
        let mut qm = vec![q; k];
        qm.push(1.0 - q * k as f64);
        p.push(1.0 - p.iter().sum::<f64>());
        let b = vec![(0.0, 1.0)];
        let qg = GridDensity::new(b.clone(), vec![k + 1], qm).unwrap();
        let pg = GridDensity::new(b, vec![k + 1], p.clone()).unwrap();
        let w = weight_factors(&qg, &pg).unwrap();
        for i in 1..k {
            if p[i - 1] == 0.0 {
                continue;
            }
            checked += 1;
            if w.neg_log_d[i] > w.neg_log_d[i - 1] {
                violations += 1;
            }
            // |log(q / q_m)| shrinks towards p_r = q and grows beyond it, so
            // it is monotone only where p_r dominates.
            if p[i - 1] >= q && w.jsd[i] < w.jsd[i - 1] {
                violations += 1;
            }
        }
    }
    Outcome {
        passed: violations == 0 && checked > 0,
        detail: format!("{checked} adjacent cell pairs, {violations} violations"),
    }
}

fn adaptivity() -> Outcome {
    let f = GeneratorFamily::Shift { dim: 2 };
    let origin = EmpiricalDistribution::dirac(&[0.0, 0.0]).unwrap();
    let z = Array2::zeros((1, 2));
    let (mut worst2, mut worst1) = (0.0f64, 0.0f64);
    for k in 1..=100 {
        let d = k as f64 / 10.0;
        let angle = 0.7 * k as f64;
        let theta = [d * angle.cos(), d * angle.sin()];
        let norm = |g: &[f64]| g.iter().map(|x| x * x).sum::<f64>().sqrt();
        let (_, g2) = w2sq_value_and_gradient(&origin, &f, &theta, &z).unwrap();
        let (_, g1) = w1_value_and_gradient(&origin, &f, &theta, &z, Ground::Euclidean).unwrap();
        worst2 = worst2.max((norm(&g2) - 2.0 * d).abs());
        worst1 = worst1.max((norm(&g1) - 1.0).abs());
    }
    Outcome {
        passed: worst2 <= 1e-9 && worst1 <= 1e-9,
        detail: format!(
            "d = 0.1..10, worst |grad W2^2| - 2d {worst2:e}, worst |grad W1| - 1 {worst1:e}"
        ),
    }
}

fn suite(cfg: &ExperimentConfig) -> Vec<ExperimentReport> {
    vec![
        run_mcs_sweep(&cfg.mcs_sweep, SEED).unwrap(),
        run_translation_density(&cfg.translation, SEED).unwrap(),
        run_gradient_audit(&cfg.gradient_audit, SEED).unwrap(),
        run_toy_training(&cfg.toy_training, SEED).unwrap(),
    ]
}

fn csv_bytes(reports: &[ExperimentReport], dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    for r in reports {
        for path in write_report(r, dir, ReportFormat::Csv).unwrap() {
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            files.insert(name, fs::read(&path).unwrap());
        }
    }
    files
}

fn main() -> ExitCode {
    let mut all = true;
    let mut report = |name: &str, limit: Duration, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let took = start.elapsed();
        let passed = o.passed && took <= limit;
        all &= passed;
        println!(
            "{} {name} [{took:.2?} / {limit:?}]: {}",
            if passed { "PASS" } else { "FAIL" },
            o.detail
        );
    };

    let cfg = ExperimentConfig::default();
    let mut first: Vec<ExperimentReport> = Vec::new();
    report(
        "1 ot_oracle_equivalence",
        Duration::from_secs(10),
        &mut ot_oracle,
    );
    report(
        "2 disjoint_support_jsd_ceiling",
        Duration::from_secs(1),
        &mut disjoint_jsd,
    );
    report("3 mcs_sweep", Duration::from_secs(30), &mut || {
        first.push(run_mcs_sweep(&cfg.mcs_sweep, SEED).unwrap());
        verdicts_of(first.last().unwrap())
    });
    report(
        "4 translation_collapses_overlap",
        Duration::from_secs(120),
        &mut || {
            first.push(run_translation_density(&cfg.translation, SEED).unwrap());
            verdicts_of(first.last().unwrap())
        },
    );
    report("5 gradient_audits", Duration::from_secs(120), &mut || {
        first.push(run_gradient_audit(&cfg.gradient_audit, SEED).unwrap());
        verdicts_of(first.last().unwrap())
    });
    report(
        "6 weight_factor_monotonicity",
        Duration::from_secs(1),
        &mut weight_monotonicity,
    );
    report(
        "7 adaptivity_contrast",
        Duration::from_secs(1),
        &mut adaptivity,
    );
    report("8 toy_training", Duration::from_secs(180), &mut || {
        first.push(run_toy_training(&cfg.toy_training, SEED).unwrap());
        verdicts_of(first.last().unwrap())
    });
    report("9 determinism", Duration::from_secs(600), &mut || {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let before = csv_bytes(&first, a.path());
        // Rerun on a single worker thread so scheduling cannot matter.
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let again = pool.install(|| suite(&cfg));
        let after = csv_bytes(&again, b.path());
        let differing: Vec<&String> = before
            .keys()
            .filter(|k| after.get(*k) != before.get(*k))
            .collect();
        Outcome {
            passed: before.len() == after.len() && differing.is_empty(),
            detail: format!("{} files compared, differing: {differing:?}", before.len()),
        }
    });

    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
