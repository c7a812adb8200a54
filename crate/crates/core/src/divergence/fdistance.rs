//! Capacity-restricted discriminator distances.
//!
//! For a discriminator `D: R^n → [0, 1]` the estimator scores
//!
//! ```text
//! value(D) = log 2 + ½ (E_P[log D] + E_Q[log(1 − D)])
//! ```
//!
//! and takes the supremum over a restricted family. Over all functions the
//! supremum is attained at `D = p / (p + q)` and equals `JSD(P, Q)`; any
//! smaller family gives a value between 0 (when the family contains the
//! constant ½) and the JSD. [`literal_objective`] evaluates the variant with
//! a minus sign between the expectations and an outer absolute value, which
//! is unbounded over any family that lets `D` approach 0 on the support of
//! `P`; it is exposed for inspection only.

use std::f64::consts::LN_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::GridDensity;
use crate::error::{Error, Result};
use crate::transport::EmpiricalDistribution;

/// Discriminator classes searched by [`estimate_f_distance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DiscriminatorFamily {
    /// Piecewise-constant `D` on the two sides of an axis-aligned threshold.
    /// Searched exhaustively over axes and sample midpoints.
    TwoCellPartition,
    /// `D(x) = σ(w·φ(x) + c)` over `features` seeded random Fourier features
    /// of the standardized coordinates, fitted by projected gradient ascent.
    LogisticFeatures { features: usize },
}

/// Box constraint on logistic weights.
pub const LOGISTIC_WEIGHT_BOUND: f64 = 20.0;

/// Supremum of the discriminator objective over `family`.
///
/// `steps` bounds the gradient iterations of the logistic family and is
/// ignored by the exhaustive partition search; `seed` fixes the random
/// features.
pub fn estimate_f_distance(
    p: &EmpiricalDistribution,
    q: &EmpiricalDistribution,
    family: DiscriminatorFamily,
    steps: usize,
    seed: u64,
) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    match family {
        DiscriminatorFamily::TwoCellPartition => Ok(best_partition(p, q)),
        DiscriminatorFamily::LogisticFeatures { features: 0 } => Err(Error::invalid(
            "logistic discriminator family needs at least one feature",
        )),
        DiscriminatorFamily::LogisticFeatures { features } => {
            Ok(logistic_ascent(p, q, features, steps, seed))
        }
    }
}

/// Full-capacity value on a grid: the objective at the cell-wise optimum
/// `D_i = p_i / (p_i + q_i)`, computed cell by cell.
pub fn cellwise_f_distance(p: &GridDensity, q: &GridDensity) -> Result<f64> {
    p.check_same(q)?;
    let mut total = 0.0;
    for (&pi, &qi) in p.masses().iter().zip(q.masses()) {
        if pi + qi == 0.0 {
            continue;
        }
        let d = pi / (pi + qi);
        if pi > 0.0 {
            total += pi * d.ln();
        }
        if qi > 0.0 {
            total += qi * (1.0 - d).ln();
        }
    }
    Ok(LN_2 + 0.5 * total)
}

/// `|E_P[log D] − E_Q[log(1 − D)]| − 2 log ½` for a given discriminator.
pub fn literal_objective(
    p: &EmpiricalDistribution,
    q: &EmpiricalDistribution,
    discriminator: impl Fn(&[f64]) -> f64,
) -> f64 {
    let expect = |dist: &EmpiricalDistribution, f: &dyn Fn(f64) -> f64| {
        dist.points()
            .rows()
            .into_iter()
            .zip(dist.weights().iter())
            .map(|(x, w)| w * f(discriminator(&x.to_vec())))
            .sum::<f64>()
    };
    let on_p = expect(p, &|d| d.ln());
    let on_q = expect(q, &|d| (1.0 - d).ln());
    (on_p - on_q).abs() - 2.0 * 0.5f64.ln()
}

fn two_cell_value(pa: f64, qa: f64, pb: f64, qb: f64) -> f64 {
    super::measures::jsd_masses(&[pa, pb], &[qa, qb])
}

fn best_partition(p: &EmpiricalDistribution, q: &EmpiricalDistribution) -> f64 {
    // (coordinate, mass under P, mass under Q) for every atom of both clouds.
    let mut best = 0.0f64;
    for axis in 0..p.dim() {
        let mut atoms: Vec<(f64, f64, f64)> = Vec::with_capacity(p.len() + q.len());
        atoms.extend(
            p.points()
                .column(axis)
                .iter()
                .zip(p.weights().iter())
                .map(|(&x, &w)| (x, w, 0.0)),
        );
        atoms.extend(
            q.points()
                .column(axis)
                .iter()
                .zip(q.weights().iter())
                .map(|(&x, &w)| (x, 0.0, w)),
        );
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (mut pa, mut qa) = (0.0, 0.0);
        for k in 0..atoms.len() {
            pa += atoms[k].1;
            qa += atoms[k].2;
            let split_here = k + 1 == atoms.len() || atoms[k + 1].0 > atoms[k].0;
            if split_here {
                let value = two_cell_value(pa, qa, (1.0 - pa).max(0.0), (1.0 - qa).max(0.0));
                best = best.max(value);
            }
        }
    }
    best
}

struct Features {
    mean: Vec<f64>,
    scale: Vec<f64>,
    freqs: Vec<Vec<f64>>,
    phases: Vec<f64>,
}

impl Features {
    fn new(p: &EmpiricalDistribution, q: &EmpiricalDistribution, k: usize, seed: u64) -> Self {
        let d = p.dim();
        let mut mean = vec![0.0; d];
        let mut sq = vec![0.0; d];
        let pooled = p.points().rows().into_iter().chain(q.points().rows());
        let count = (p.len() + q.len()) as f64;
        for row in pooled {
            for (a, &v) in row.iter().enumerate() {
                mean[a] += v / count;
                sq[a] += v * v / count;
            }
        }
        let scale = mean
            .iter()
            .zip(&sq)
            .map(|(m, s)| (s - m * m).max(0.0).sqrt().max(1e-12))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut freqs = Vec::with_capacity(k);
        let mut phases = Vec::with_capacity(k);
        for _ in 0..k {
            freqs.push((0..d).map(|_| rng.sample(StandardNormal)).collect());
            phases.push(rng.random::<f64>() * std::f64::consts::TAU);
        }
        Self {
            mean,
            scale,
            freqs,
            phases,
        }
    }

    /// Feature vector with a trailing constant 1 for the bias.
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        let z: Vec<f64> = x
            .iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect();
        let mut phi: Vec<f64> = self
            .freqs
            .iter()
            .zip(&self.phases)
            .map(|(w, b)| {
                let arg: f64 = w.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>() + b;
                std::f64::consts::SQRT_2 * arg.cos()
            })
            .collect();
        phi.push(1.0);
        phi
    }
}

fn log_sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        -(-s).exp().ln_1p()
    } else {
        s - s.exp().ln_1p()
    }
}

fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

fn logistic_ascent(
    p: &EmpiricalDistribution,
    q: &EmpiricalDistribution,
    k: usize,
    steps: usize,
    seed: u64,
) -> f64 {
    let features = Features::new(p, q, k, seed);
    let embed = |dist: &EmpiricalDistribution| -> Vec<(Vec<f64>, f64)> {
        dist.points()
            .rows()
            .into_iter()
            .zip(dist.weights().iter())
            .map(|(x, &w)| (features.eval(&x.to_vec()), w))
            .collect()
    };
    let on_p = embed(p);
    let on_q = embed(q);
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    // E_P[log σ(s)] + E_Q[log(1 − σ(s))]; note log(1 − σ(s)) = log σ(−s).
    let objective = |w: &[f64]| {
        on_p.iter()
            .map(|(f, m)| m * log_sigmoid(dot(w, f)))
            .sum::<f64>()
            + on_q
                .iter()
                .map(|(f, m)| m * log_sigmoid(-dot(w, f)))
                .sum::<f64>()
    };
    let gradient = |w: &[f64]| {
        let mut g = vec![0.0; w.len()];
        for (f, m) in &on_p {
            let c = m * (1.0 - sigmoid(dot(w, f)));
            g.iter_mut().zip(f).for_each(|(gi, fi)| *gi += c * fi);
        }
        for (f, m) in &on_q {
            let c = m * sigmoid(dot(w, f));
            g.iter_mut().zip(f).for_each(|(gi, fi)| *gi -= c * fi);
        }
        g
    };
    let project = |w: &mut [f64]| {
        w.iter_mut()
            .for_each(|v| *v = v.clamp(-LOGISTIC_WEIGHT_BOUND, LOGISTIC_WEIGHT_BOUND))
    };

    let mut w = vec![0.0; k + 1];
    let mut value = objective(&w);
    // ‖φ‖² ≤ 2k + 1 bounds the curvature by (2k + 1) / 2.
    let mut step = 2.0 / (2 * k + 1) as f64;
    for _ in 0..steps {
        let g = gradient(&w);
        let mut accepted = false;
        for _ in 0..30 {
            let mut trial: Vec<f64> = w.iter().zip(&g).map(|(wi, gi)| wi + step * gi).collect();
            project(&mut trial);
            let moved: f64 = trial.iter().zip(&w).map(|(a, b)| (a - b) * (a - b)).sum();
            let trial_value = objective(&trial);
            if moved == 0.0 {
                break;
            }
            // Sufficient increase along the projected arc.
            if trial_value >= value + moved / (4.0 * step) {
                w = trial;
                value = trial_value;
                step *= 1.5;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (LN_2 + 0.5 * value).max(0.0)
}
