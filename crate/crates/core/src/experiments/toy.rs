use std::f64::consts::TAU;

use ndarray::Array2;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::config::{config_hash, derive_seed, Init, Loss, ToyTrainingConfig};
use super::report::{ExperimentReport, Plot, Provenance, Table, Verdict};
use crate::divergence::{histogram, smooth, GridDensity};
use crate::error::{Error, Result};
use crate::gradients::{
    jsd_value_and_gradient, neg_log_d_value_and_gradient, pushforward, softplus, softplus_inverse,
    w1_value_and_gradient, w2sq_value_and_gradient, GeneratorFamily,
};
use crate::manifolds::{default_tau, sample_manifold, ManifoldSpec, SamplingDensity};
use crate::transport::{EmpiricalDistribution, Ground};

/// Scale used for the degenerate "start at the target" initialization.
const TARGET_INIT_SCALE: f64 = 1e-6;

struct Target {
    circle: ManifoldSpec,
    centers: Vec<[f64; 2]>,
    coverage_radius: f64,
    tau: f64,
}

impl Target {
    fn new(cfg: &ToyTrainingConfig) -> Result<Self> {
        if cfg.modes < 2 {
            return Err(Error::invalid("toy training needs at least two modes"));
        }
        let circle = ManifoldSpec::circle(vec![0.0, 0.0], cfg.radius)?;
        let centers: Vec<[f64; 2]> = (0..cfg.modes)
            .map(|c| {
                let a = TAU * c as f64 / cfg.modes as f64;
                [cfg.radius * a.cos(), cfg.radius * a.sin()]
            })
            .collect();
        // Equally spaced modes: neighbours are the closest pair.
        let spacing = 2.0 * cfg.radius * (std::f64::consts::PI / cfg.modes as f64).sin();
        Ok(Self {
            circle,
            centers,
            coverage_radius: spacing / 4.0,
            tau: default_tau(cfg.alignment_resolution),
        })
    }

    fn samples(
        &self,
        cfg: &ToyTrainingConfig,
        count: usize,
        seed: u64,
    ) -> Result<EmpiricalDistribution> {
        let density = SamplingDensity::Mixture {
            modes: (0..cfg.modes)
                .map(|c| vec![c as f64 / cfg.modes as f64])
                .collect(),
            weights: vec![1.0; cfg.modes],
            width: cfg.mode_width,
        };
        sample_manifold(&self.circle, count, &density, seed)
    }

    /// Fraction of modes holding at least half their expected share of `x`
    /// within the coverage radius.
    fn coverage(&self, x: &Array2<f64>) -> f64 {
        let share = 0.5 * x.nrows() as f64 / self.centers.len() as f64;
        let covered = self
            .centers
            .iter()
            .filter(|c| {
                let hits = x
                    .rows()
                    .into_iter()
                    .filter(|p| (p[0] - c[0]).hypot(p[1] - c[1]) <= self.coverage_radius)
                    .count();
                hits as f64 >= share
            })
            .count();
        covered as f64 / self.centers.len() as f64
    }

    fn alignment(&self, x: &Array2<f64>) -> f64 {
        let near = x
            .rows()
            .into_iter()
            .filter(|p| self.circle.distance(&p.to_vec()) <= self.tau)
            .count();
        near as f64 / x.nrows().max(1) as f64
    }
}

/// Means, raw scales (and logits for the density family) at initialization.
fn initial_theta(cfg: &ToyTrainingConfig, target: &Target, density: bool, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (means, scale): (Vec<f64>, f64) = match cfg.init {
        Init::Random => (
            (0..2 * cfg.modes)
                .map(|_| cfg.init_spread * rng.sample::<f64, _>(StandardNormal))
                .collect(),
            cfg.init_scale,
        ),
        Init::Target => (
            target
                .centers
                .iter()
                .flat_map(|c| c.iter().copied())
                .collect(),
            TARGET_INIT_SCALE,
        ),
    };
    let logits = if density {
        vec![0.0; cfg.modes]
    } else {
        Vec::new()
    };
    logits
        .into_iter()
        .chain(means)
        .chain(std::iter::repeat_n(softplus_inverse(scale), cfg.modes))
        .collect()
}

/// Draws from the density family at `theta` with a fixed stream.
fn mixture_draws(
    cfg: &ToyTrainingConfig,
    theta: &[f64],
    count: usize,
    seed: u64,
) -> Result<Array2<f64>> {
    let k = cfg.modes;
    let top = theta[..k].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = theta[..k].iter().map(|l| (l - top).exp()).collect();
    let pick =
        WeightedIndex::new(&w).map_err(|e| Error::invalid(format!("mixture weights: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flat = Vec::with_capacity(2 * count);
    for _ in 0..count {
        let c = pick.sample(&mut rng);
        let s = softplus(theta[k * 3 + c]);
        for a in 0..2 {
            let z: f64 = rng.sample(StandardNormal);
            flat.push(theta[k + 2 * c + a] + s * z);
        }
    }
    Array2::from_shape_vec((count, 2), flat).map_err(|e| Error::invalid(e.to_string()))
}

struct Trajectory {
    loss: Loss,
    seed: usize,
    /// (value, coverage, alignment) per completed iterate.
    points: Vec<(f64, f64, f64)>,
    status: String,
}

fn train(
    cfg: &ToyTrainingConfig,
    target: &Target,
    p_grid: &GridDensity,
    loss: Loss,
    run: usize,
    seed: u64,
) -> Result<Trajectory> {
    let density = !loss.uses_transport();
    let family = if density {
        GeneratorFamily::GaussianMixtureDensity {
            components: cfg.modes,
            dim: 2,
        }
    } else {
        GeneratorFamily::MixturePushforward {
            components: cfg.modes,
            dim: 2,
        }
    };
    let run_seed = derive_seed(seed, 40, run as u64);
    let p_samples = target.samples(cfg, cfg.samples, derive_seed(run_seed, 1, 0))?;
    let latents = if density {
        None
    } else {
        Some(family.sample_latents(cfg.samples, derive_seed(run_seed, 2, 0))?)
    };
    let mut theta = initial_theta(cfg, target, density, derive_seed(run_seed, 3, 0));
    let eta = cfg.step.get(loss);

    let evaluate = |theta: &[f64]| -> Result<(f64, Vec<f64>, Array2<f64>)> {
        let (value, grad) = match (loss, &latents) {
            (Loss::W2sq, Some(z)) => w2sq_value_and_gradient(&p_samples, &family, theta, z)?,
            (Loss::W1, Some(z)) => {
                w1_value_and_gradient(&p_samples, &family, theta, z, Ground::Euclidean)?
            }
            (Loss::Jsd, _) => jsd_value_and_gradient(&family, theta, p_grid)?,
            (Loss::NegLogD, _) => neg_log_d_value_and_gradient(&family, theta, p_grid)?,
            _ => unreachable!("transport losses always carry latents"),
        };
        let draws = match &latents {
            Some(z) => pushforward(&family, theta, z)?.points().clone(),
            None => mixture_draws(cfg, theta, cfg.samples, derive_seed(run_seed, 4, 0))?,
        };
        Ok((value, grad, draws))
    };

    let mut points = Vec::with_capacity(cfg.iterations + 1);
    let mut status = "ok".to_string();
    for it in 0..=cfg.iterations {
        let failure = match evaluate(&theta) {
            Ok((value, grad, _)) if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) => {
                Some("non-finite loss or gradient".to_string())
            }
            Ok((value, grad, draws)) => {
                points.push((value, target.coverage(&draws), target.alignment(&draws)));
                if it < cfg.iterations {
                    theta.iter_mut().zip(&grad).for_each(|(t, g)| *t -= eta * g);
                }
                None
            }
            Err(e) => Some(e.to_string()),
        };
        if let Some(reason) = failure {
            // The flagged row keeps the failure visible in the table.
            status = format!("truncated at iteration {it}: {reason}");
            points.push((f64::NAN, f64::NAN, f64::NAN));
            break;
        }
    }
    Ok(Trajectory {
        loss,
        seed: run,
        points,
        status,
    })
}

fn density_target(cfg: &ToyTrainingConfig, target: &Target, seed: u64) -> Result<GridDensity> {
    let h = cfg.grid_half_width;
    if !(h > cfg.radius) || cfg.grid_cells < 2 {
        return Err(Error::invalid(
            "the grid box must contain the target circle",
        ));
    }
    let samples = target.samples(cfg, cfg.density_target_samples, derive_seed(seed, 41, 0))?;
    let bounds = vec![(-h, h), (-h, h)];
    let hist = histogram(&samples, &bounds, &[cfg.grid_cells, cfg.grid_cells])?;
    let smoothed = smooth(&hist, cfg.smoothing_sigma)?;
    if !(0.0..1.0).contains(&cfg.target_floor) {
        return Err(Error::invalid("target_floor must lie in [0, 1)"));
    }
    let uniform = cfg.target_floor / smoothed.len() as f64;
    let masses = smoothed
        .masses()
        .iter()
        .map(|m| (1.0 - cfg.target_floor) * m + uniform)
        .collect();
    smoothed.with_masses(masses)
}

/// Gradient flow of `W_2²(δ_0, δ_θ)` against `θ_t = θ_0 (1 − 2η)^t`.
fn single_atom(cfg: &ToyTrainingConfig) -> Result<Table> {
    let family = GeneratorFamily::Shift { dim: 1 };
    let origin = EmpiricalDistribution::dirac(&[0.0])?;
    let z = Array2::zeros((1, 1));
    let mut table = Table::new("single_atom", &["iteration", "theta", "closed_form"]);
    let mut theta = cfg.single_atom_start;
    for t in 0..=cfg.single_atom_iterations {
        let closed = cfg.single_atom_start * (1.0 - 2.0 * cfg.single_atom_step).powi(t as i32);
        table.push(vec![t.into(), theta.into(), closed.into()]);
        let (_, g) = w2sq_value_and_gradient(&origin, &family, &[theta], &z)?;
        theta -= cfg.single_atom_step * g[0];
    }
    Ok(table)
}

/// Trains mixture generators on a multi-mode target on a circle with each
/// loss and records loss value, mode coverage and support alignment per
/// iteration.
pub fn run_toy_training(cfg: &ToyTrainingConfig, seed: u64) -> Result<ExperimentReport> {
    if cfg.losses.is_empty() || cfg.seeds == 0 || cfg.samples == 0 {
        return Err(Error::invalid(
            "toy training needs losses, seeds and samples",
        ));
    }
    let target = Target::new(cfg)?;
    let p_grid = density_target(cfg, &target, seed)?;
    let jobs: Vec<(Loss, usize)> = cfg
        .losses
        .iter()
        .flat_map(|&l| (0..cfg.seeds).map(move |s| (l, s)))
        .collect();
    let runs: Result<Vec<Trajectory>> = jobs
        .par_iter()
        .map(|&(loss, s)| train(cfg, &target, &p_grid, loss, s, seed))
        .collect();
    let runs = runs?;

    let mut trajectory = Table::new(
        "trajectory",
        &[
            "loss",
            "seed",
            "iteration",
            "value",
            "coverage",
            "alignment",
            "status",
        ],
    );
    for r in &runs {
        for (it, &(value, coverage, alignment)) in r.points.iter().enumerate() {
            trajectory.push(vec![
                r.loss.name().into(),
                r.seed.into(),
                it.into(),
                value.into(),
                coverage.into(),
                alignment.into(),
                r.status.as_str().into(),
            ]);
        }
    }
    let atom = single_atom(cfg)?;
    let verdicts = toy_verdicts(&trajectory, &atom, cfg.single_atom_tolerance);
    let plots = vec![
        Plot {
            name: "loss".into(),
            x_label: "iteration".into(),
            y_label: "loss value".into(),
            series: runs
                .iter()
                .map(|r| {
                    (
                        format!("{} seed {}", r.loss.name(), r.seed),
                        r.points
                            .iter()
                            .enumerate()
                            .filter(|(_, p)| p.0.is_finite())
                            .map(|(i, p)| (i as f64, p.0))
                            .collect(),
                    )
                })
                .collect(),
            scatter: false,
        },
        Plot {
            name: "coverage".into(),
            x_label: "iteration".into(),
            y_label: "mode coverage".into(),
            series: runs
                .iter()
                .map(|r| {
                    (
                        format!("{} seed {}", r.loss.name(), r.seed),
                        r.points
                            .iter()
                            .enumerate()
                            .filter(|(_, p)| p.1.is_finite())
                            .map(|(i, p)| (i as f64, p.1))
                            .collect(),
                    )
                })
                .collect(),
            scatter: false,
        },
    ];
    Ok(ExperimentReport {
        experiment_id: cfg.experiment_id.clone(),
        tables: vec![trajectory, atom],
        verdicts,
        provenance: Provenance {
            config_hash: config_hash(cfg, seed),
            seeds: (0..cfg.seeds as u64)
                .map(|s| derive_seed(seed, 40, s))
                .collect(),
        },
        plots,
    })
}

/// Verdicts recomputed from the `trajectory` and `single_atom` tables.
pub fn toy_verdicts(trajectory: &Table, atom: &Table, tolerance: f64) -> Vec<Verdict> {
    let losses = trajectory.texts("loss");
    let seeds = trajectory.numbers("seed");
    let values = trajectory.numbers("value");
    let status = trajectory.texts("status");
    // Rows of one run are contiguous; compare the first and last value. A
    // truncated run has no final value and fails.
    let mut runs: Vec<(String, f64, f64, f64, bool)> = Vec::new();
    for i in 0..values.len() {
        let ok = status[i] == "ok";
        match runs.last_mut() {
            Some(r) if r.0 == losses[i] && r.1 == seeds[i] => {
                r.3 = values[i];
                r.4 &= ok;
            }
            _ => runs.push((losses[i].clone(), seeds[i], values[i], values[i], ok)),
        }
    }
    let failed: Vec<String> = runs
        .iter()
        .filter(|r| !(r.4 && r.3 <= r.2))
        .map(|r| format!("{} seed {}", r.0, r.1))
        .collect();
    let atom_error = atom
        .numbers("theta")
        .iter()
        .zip(atom.numbers("closed_form"))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    vec![
        Verdict::new(
            "final_loss_not_above_initial",
            0.0,
            !runs.is_empty() && failed.is_empty(),
            if failed.is_empty() {
                format!("{} runs", runs.len())
            } else {
                format!("increased or truncated: {}", failed.join(", "))
            },
        ),
        Verdict::new(
            "single_atom_matches_closed_form",
            tolerance,
            atom_error <= tolerance,
            format!("max deviation {atom_error:?}"),
        ),
    ]
}
