use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{config_hash, derive_seed, GradientAuditConfig};
use super::report::{ExperimentReport, Plot, Provenance, Table, Verdict};
use crate::divergence::GridDensity;
use crate::error::{Error, Result};
use crate::gradients::{
    grad_jsd, grad_neg_log_d, grad_w1, grad_w2sq, model_grid, neg_log_d_identity, pushforward,
    softplus_inverse, GeneratorFamily, GradientAudit,
};
use crate::transport::{EmpiricalDistribution, Ground};

/// Formulas in report order.
const FORMULAS: [&str; 7] = [
    "single_atom_w2sq",
    "w2sq",
    "w1_l1",
    "w1_euclidean",
    "jsd",
    "neg_log_d",
    "neg_log_d_identity",
];

fn tolerance(cfg: &GradientAuditConfig, formula: &str) -> f64 {
    match formula {
        "single_atom_w2sq" => cfg.single_atom_tolerance,
        "w2sq" | "w1_l1" | "w1_euclidean" => cfg.ot_tolerance,
        "neg_log_d_identity" => cfg.identity_tolerance,
        _ => cfg.density_tolerance,
    }
}

struct Row {
    formula: &'static str,
    seed: usize,
    formula_gradient: Vec<f64>,
    oracle_gradient: Vec<f64>,
    rel_error: f64,
}

impl Row {
    fn from_audit(formula: &'static str, seed: usize, a: GradientAudit) -> Self {
        Self {
            formula,
            seed,
            rel_error: a.max_rel_error,
            formula_gradient: a.formula_gradient,
            oracle_gradient: a.oracle_gradient,
        }
    }
}

fn single_atom_rows() -> Result<Vec<Row>> {
    let family = GeneratorFamily::Shift { dim: 1 };
    let origin = EmpiricalDistribution::dirac(&[0.0])?;
    let latent = ndarray::Array2::zeros((1, 1));
    [0.5, 1.0, -2.0, 3.5]
        .iter()
        .enumerate()
        .map(|(i, &theta)| {
            let a = grad_w2sq(&origin, &family, &[theta], &latent)?;
            Ok(Row::from_audit("single_atom_w2sq", i, a))
        })
        .collect()
}

fn ot_rows(cfg: &GradientAuditConfig, seed: u64) -> Result<Vec<Row>> {
    let n = cfg.ot_dim;
    let family = GeneratorFamily::AffinePushforward {
        latent_dim: n,
        ambient_dim: n,
    };
    let per_seed: Result<Vec<Vec<Row>>> = (0..cfg.ot_seeds)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 20, s as u64));
            let mut random_affine = |spread: f64| -> Vec<f64> {
                let mut theta = vec![0.0; family.param_len()];
                for r in 0..n {
                    for c in 0..n {
                        let base = if r == c { 1.0 } else { 0.0 };
                        theta[r * n + c] = base + spread * (rng.random::<f64>() - 0.5);
                    }
                    theta[n * n + r] = spread * (rng.random::<f64>() - 0.5);
                }
                theta
            };
            let target_theta = random_affine(1.0);
            let theta = random_affine(1.0);
            let target = pushforward(
                &family,
                &target_theta,
                &family.sample_latents(cfg.ot_samples, derive_seed(seed, 21, s as u64))?,
            )?;
            let latents = family.sample_latents(cfg.ot_samples, derive_seed(seed, 22, s as u64))?;
            Ok(vec![
                Row::from_audit("w2sq", s, grad_w2sq(&target, &family, &theta, &latents)?),
                Row::from_audit(
                    "w1_l1",
                    s,
                    grad_w1(&target, &family, &theta, &latents, Ground::L1)?,
                ),
                Row::from_audit(
                    "w1_euclidean",
                    s,
                    grad_w1(&target, &family, &theta, &latents, Ground::Euclidean)?,
                ),
            ])
        })
        .collect();
    Ok(per_seed?.into_iter().flatten().collect())
}

fn density_theta(rng: &mut ChaCha8Rng, components: usize) -> Vec<f64> {
    let logits: Vec<f64> = (0..components)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let means: Vec<f64> = (0..components)
        .map(|_| rng.random_range(-1.0..2.0))
        .collect();
    let scales: Vec<f64> = (0..components)
        .map(|_| softplus_inverse(rng.random_range(0.5..1.2)))
        .collect();
    [logits, means, scales].concat()
}

fn density_target(cfg: &GradientAuditConfig) -> Result<GridDensity> {
    if cfg.density_cells < 2 || !(cfg.density_box.0 < cfg.density_box.1) {
        return Err(Error::invalid(
            "density grid needs >= 2 cells and a nonempty box",
        ));
    }
    let template =
        GridDensity::from_density(vec![cfg.density_box], vec![cfg.density_cells], |_| 1.0)?;
    let target = GeneratorFamily::GaussianMixtureDensity {
        components: 2,
        dim: 1,
    };
    let target_theta = [
        0.0,
        0.3,
        0.0,
        1.5,
        softplus_inverse(1.0),
        softplus_inverse(0.7),
    ];
    Ok(model_grid(&target, &target_theta, &template)?.density)
}

fn density_rows(cfg: &GradientAuditConfig, seed: u64) -> Result<Vec<Row>> {
    if cfg.density_components == 0 {
        return Err(Error::invalid("density_components must be positive"));
    }
    let p_r = density_target(cfg)?;
    let family = GeneratorFamily::GaussianMixtureDensity {
        components: cfg.density_components,
        dim: 1,
    };
    let draws = cfg.density_draws.max(cfg.identity_draws);
    let per_draw: Result<Vec<Vec<Row>>> = (0..draws)
        .into_par_iter()
        .map(|d| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 30, d as u64));
            let theta = density_theta(&mut rng, cfg.density_components);
            let mut rows = Vec::new();
            if d < cfg.density_draws {
                rows.push(Row::from_audit("jsd", d, grad_jsd(&family, &theta, &p_r)?));
                rows.push(Row::from_audit(
                    "neg_log_d",
                    d,
                    grad_neg_log_d(&family, &theta, &p_r)?,
                ));
            }
            if d < cfg.identity_draws {
                let id = neg_log_d_identity(&family, &theta, &p_r)?;
                rows.push(Row {
                    formula: "neg_log_d_identity",
                    seed: d,
                    formula_gradient: id.via_kl_minus_jsd,
                    oracle_gradient: id.via_mixture_kl,
                    rel_error: id.max_rel_error,
                });
            }
            Ok(rows)
        })
        .collect();
    let mut rows: Vec<Row> = per_draw?.into_iter().flatten().collect();

    // Location family N(θ, 1) against N(0, 1) at θ = 1.
    let location = GeneratorFamily::GaussianMixtureDensity {
        components: 1,
        dim: 1,
    };
    let template =
        GridDensity::from_density(vec![cfg.density_box], vec![cfg.density_cells], |_| 1.0)?;
    let reference = model_grid(&location, &[0.0, 0.0, softplus_inverse(1.0)], &template)?.density;
    let theta = [0.0, 1.0, softplus_inverse(1.0)];
    rows.push(Row::from_audit(
        "jsd",
        draws,
        grad_jsd(&location, &theta, &reference)?,
    ));
    rows.push(Row::from_audit(
        "neg_log_d",
        draws,
        grad_neg_log_d(&location, &theta, &reference)?,
    ));
    Ok(rows)
}

/// Checks every generator-gradient formula against central finite
/// differences through full re-solves / re-gridding.
pub fn run_gradient_audit(cfg: &GradientAuditConfig, seed: u64) -> Result<ExperimentReport> {
    if cfg.ot_samples == 0 || cfg.ot_dim == 0 {
        return Err(Error::invalid("ot_samples and ot_dim must be positive"));
    }
    let mut rows = single_atom_rows()?;
    rows.extend(ot_rows(cfg, seed)?);
    rows.extend(density_rows(cfg, seed)?);

    let mut audit = Table::new(
        "audit",
        &[
            "formula",
            "seed",
            "theta_index",
            "formula_value",
            "oracle_value",
            "rel_error",
        ],
    );
    for r in &rows {
        for (c, (f, o)) in r
            .formula_gradient
            .iter()
            .zip(&r.oracle_gradient)
            .enumerate()
        {
            audit.push(vec![
                r.formula.into(),
                r.seed.into(),
                c.into(),
                (*f).into(),
                (*o).into(),
                r.rel_error.into(),
            ]);
        }
    }
    let mut summary = Table::new("summary", &["formula", "max_rel_error", "tolerance"]);
    for formula in FORMULAS {
        let worst = rows
            .iter()
            .filter(|r| r.formula == formula)
            .map(|r| r.rel_error)
            .fold(f64::NEG_INFINITY, f64::max);
        if worst.is_finite() {
            summary.push(vec![
                formula.into(),
                worst.into(),
                tolerance(cfg, formula).into(),
            ]);
        }
    }
    let verdicts = audit_verdicts(&summary);
    let scatter = FORMULAS
        .iter()
        .map(|f| {
            let pts = rows
                .iter()
                .filter(|r| r.formula == *f)
                .map(|r| (r.seed as f64, r.rel_error.max(1e-300).log10()))
                .collect();
            (f.to_string(), pts)
        })
        .filter(|(_, pts): &(String, Vec<(f64, f64)>)| !pts.is_empty())
        .collect();
    Ok(ExperimentReport {
        experiment_id: cfg.experiment_id.clone(),
        tables: vec![audit, summary],
        verdicts,
        provenance: Provenance {
            config_hash: config_hash(cfg, seed),
            seeds: vec![seed],
        },
        plots: vec![Plot {
            name: "rel_error".into(),
            x_label: "seed / draw".into(),
            y_label: "log10 relative error".into(),
            series: scatter,
            scatter: true,
        }],
    })
}

/// One verdict per row of the `summary` table.
pub fn audit_verdicts(summary: &Table) -> Vec<Verdict> {
    let names = summary.texts("formula");
    let worst = summary.numbers("max_rel_error");
    let tol = summary.numbers("tolerance");
    names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            Verdict::new(
                &format!("{name}_gradient_matches_oracle"),
                tol[i],
                worst[i] <= tol[i],
                format!("max relative error {:?}", worst[i]),
            )
        })
        .collect()
}
