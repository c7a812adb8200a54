use std::f64::consts::LN_2;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{config_hash, derive_seed, McsSweepConfig};
use super::report::{ExperimentReport, Plot, Provenance, Table, Verdict};
use crate::divergence::{estimate_f_distance, jsd, DiscriminatorFamily, GridDensity};
use crate::error::{Error, Result};
use crate::transport::EmpiricalDistribution;

struct Family {
    p_r: GridDensity,
    shared_cells: usize,
    half: usize,
}

impl Family {
    fn new(cfg: &McsSweepConfig) -> Result<Self> {
        if cfg.cells < 2 || !cfg.cells.is_multiple_of(2) {
            return Err(Error::invalid(
                "mcs sweep needs an even number of cells >= 2",
            ));
        }
        if !(cfg.shared_fraction > 0.0 && cfg.shared_fraction <= 1.0) {
            return Err(Error::invalid("shared_fraction must lie in (0, 1]"));
        }
        if cfg.rho_points < 2 || cfg.alpha_points < 2 {
            return Err(Error::invalid("need at least two rho and two alpha points"));
        }
        let half = cfg.cells / 2;
        let shared_cells = ((cfg.shared_fraction * half as f64).round() as usize).clamp(1, half);
        let masses = (0..cfg.cells)
            .map(|i| if i < half { 1.0 } else { 0.0 })
            .collect();
        let p_r = GridDensity::from_unnormalized(vec![(0.0, 2.0)], vec![cfg.cells], masses)?;
        Ok(Self {
            p_r,
            shared_cells,
            half,
        })
    }

    fn q(&self, rho: f64) -> Result<GridDensity> {
        let on_shared = rho / self.shared_cells as f64;
        let on_disjoint = (1.0 - rho) / self.half as f64;
        let masses = (0..2 * self.half)
            .map(|i| {
                if i < self.shared_cells {
                    on_shared
                } else if i < self.half {
                    0.0
                } else {
                    on_disjoint
                }
            })
            .collect();
        GridDensity::from_unnormalized(
            self.p_r.bounds().to_vec(),
            self.p_r.shape().to_vec(),
            masses,
        )
    }

    /// Length of `supp P_r ∩ supp Q`.
    fn overlap(&self, q: &GridDensity) -> f64 {
        let h = q.cell_width(0);
        self.p_r
            .masses()
            .iter()
            .zip(q.masses())
            .filter(|(a, b)| **a > 0.0 && **b > 0.0)
            .count() as f64
            * h
    }
}

fn sample_grid(g: &GridDensity, count: usize, seed: u64) -> Result<EmpiricalDistribution> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cdf: Vec<f64> = g
        .masses()
        .iter()
        .scan(0.0, |acc, m| {
            *acc += m;
            Some(*acc)
        })
        .collect();
    let h = g.cell_width(0);
    let lo = g.bounds()[0].0;
    let pts: Vec<f64> = (0..count)
        .map(|_| {
            let u = rng.random::<f64>() * cdf[cdf.len() - 1];
            let cell = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
            lo + (cell as f64 + rng.random::<f64>()) * h
        })
        .collect();
    let points =
        Array2::from_shape_vec((count, 1), pts).map_err(|e| Error::invalid(e.to_string()))?;
    EmpiricalDistribution::uniform(points)
}

/// Sweeps the overlap-fraction family and checks the JSD ceiling, strict
/// monotonicity in ρ, and the monotone α ↦ minimal-overlap map.
pub fn run_mcs_sweep(cfg: &McsSweepConfig, seed: u64) -> Result<ExperimentReport> {
    let family = Family::new(cfg)?;
    let rhos: Vec<f64> = (0..cfg.rho_points)
        .map(|i| i as f64 / (cfg.rho_points - 1) as f64)
        .collect();
    let mut sweep = Table::new("sweep", &["rho", "overlap", "jsd"]);
    let mut members = Vec::with_capacity(rhos.len());
    for &rho in &rhos {
        let effective = if cfg.negative_control { 1.0 - rho } else { rho };
        let q = family.q(effective)?;
        let value = jsd(&family.p_r, &q)?;
        let overlap = family.overlap(&q);
        sweep.push(vec![rho.into(), overlap.into(), value.into()]);
        members.push(q);
    }

    let alphas: Vec<f64> = (0..cfg.alpha_points)
        .map(|i| LN_2 * i as f64 / (cfg.alpha_points - 1) as f64)
        .collect();
    let jsds = sweep.numbers("jsd");
    let overlaps = sweep.numbers("overlap");
    let mut alpha_map = Table::new("alpha_map", &["alpha", "min_overlap"]);
    for &alpha in &alphas {
        let min = jsds
            .iter()
            .zip(&overlaps)
            .filter(|(j, _)| **j <= alpha)
            .map(|(_, o)| *o)
            .fold(f64::INFINITY, f64::min);
        alpha_map.push(vec![alpha.into(), min.into()]);
    }

    let mut tables = vec![sweep.clone(), alpha_map.clone()];
    if cfg.f_distance_samples > 0 {
        let n = cfg.f_distance_samples;
        let rows: Result<Vec<_>> = rhos
            .par_iter()
            .zip(members.par_iter())
            .enumerate()
            .map(|(i, (&rho, q))| {
                let ps = sample_grid(&family.p_r, n, derive_seed(seed, 1, i as u64))?;
                let qs = sample_grid(q, n, derive_seed(seed, 2, i as u64))?;
                let part =
                    estimate_f_distance(&ps, &qs, DiscriminatorFamily::TwoCellPartition, 0, 0)?;
                let logistic = estimate_f_distance(
                    &ps,
                    &qs,
                    DiscriminatorFamily::LogisticFeatures {
                        features: cfg.logistic_features,
                    },
                    cfg.logistic_steps,
                    derive_seed(seed, 3, i as u64),
                )?;
                Ok((rho, part, logistic))
            })
            .collect();
        let mut scatter = Table::new(
            "f_distance",
            &[
                "rho",
                "alpha_hat_partition",
                "alpha_hat_logistic",
                "overlap",
            ],
        );
        for ((rho, part, logistic), overlap) in rows?.into_iter().zip(&overlaps) {
            scatter.push(vec![
                rho.into(),
                part.into(),
                logistic.into(),
                (*overlap).into(),
            ]);
        }
        tables.push(scatter);
    }

    let verdicts = mcs_verdicts(&sweep, &alpha_map, cfg.jsd_tolerance);
    let plots = vec![
        Plot {
            name: "jsd_vs_rho".into(),
            x_label: "overlap fraction rho".into(),
            y_label: "JSD (nats)".into(),
            series: vec![(
                "JSD".into(),
                rhos.iter().copied().zip(jsds.iter().copied()).collect(),
            )],
            scatter: false,
        },
        Plot {
            name: "alpha_map".into(),
            x_label: "alpha".into(),
            y_label: "minimal common support".into(),
            series: vec![(
                "min overlap".into(),
                alpha_map
                    .numbers("alpha")
                    .into_iter()
                    .zip(alpha_map.numbers("min_overlap"))
                    .collect(),
            )],
            scatter: true,
        },
    ];
    Ok(ExperimentReport {
        experiment_id: cfg.experiment_id.clone(),
        tables,
        verdicts,
        provenance: Provenance {
            config_hash: config_hash(cfg, seed),
            seeds: vec![seed],
        },
        plots,
    })
}

/// Verdicts recomputed from the `sweep` and `alpha_map` tables alone.
pub fn mcs_verdicts(sweep: &Table, alpha_map: &Table, jsd_tolerance: f64) -> Vec<Verdict> {
    let rho = sweep.numbers("rho");
    let jsds = sweep.numbers("jsd");
    let at_zero = rho
        .iter()
        .position(|&r| r == 0.0)
        .map(|i| jsds[i])
        .unwrap_or(f64::NAN);
    let ceiling = (at_zero - LN_2).abs() <= jsd_tolerance;

    let mut order: Vec<usize> = (0..rho.len()).collect();
    order.sort_by(|&a, &b| rho[a].total_cmp(&rho[b]));
    let worst_step = order
        .windows(2)
        .map(|w| jsds[w[1]] - jsds[w[0]])
        .fold(f64::NEG_INFINITY, f64::max);
    let strictly_decreasing = worst_step < 0.0;

    let alphas = alpha_map.numbers("alpha");
    let mins = alpha_map.numbers("min_overlap");
    let non_increasing = mins.windows(2).all(|w| w[1] <= w[0]);
    let positive_below = alphas
        .iter()
        .zip(&mins)
        .filter(|(a, _)| **a < LN_2 - jsd_tolerance)
        .all(|(_, m)| *m > 0.0);
    let zero_at_top = alphas
        .iter()
        .zip(&mins)
        .filter(|(a, _)| **a >= LN_2 - jsd_tolerance)
        .all(|(_, m)| *m == 0.0);
    vec![
        Verdict::new(
            "jsd_at_rho_zero_is_log2",
            jsd_tolerance,
            ceiling,
            format!("JSD(rho=0) = {at_zero:?}"),
        ),
        Verdict::new(
            "jsd_strictly_decreasing_in_rho",
            0.0,
            strictly_decreasing,
            format!("largest consecutive change {worst_step:?}"),
        ),
        Verdict::new(
            "min_overlap_non_increasing_in_alpha",
            0.0,
            non_increasing,
            format!("{} alpha levels", alphas.len()),
        ),
        Verdict::new(
            "min_overlap_positive_below_log2_zero_at_log2",
            jsd_tolerance,
            positive_below && zero_at_top,
            format!("positive below log 2: {positive_below}, zero at log 2: {zero_at_top}"),
        ),
    ]
}
