use serde::{Deserialize, Serialize};

use super::family::GeneratorFamily;
use super::fd::{finite_difference, relative_error, GradientAudit, DEFAULT_H_REL};
use crate::divergence::{jsd_unclamped, kl_masses, GridDensity};
use crate::error::{Error, Result};

/// Largest allowed deviation of the raw midpoint-rule mass from one.
pub const QUADRATURE_TOLERANCE: f64 = 1e-6;

/// Model density on a grid together with the gradient of every cell mass.
#[derive(Debug, Clone)]
pub struct ModelGrid {
    pub density: GridDensity,
    /// `mass_gradients[i] = ∇_θ q_i`.
    pub mass_gradients: Vec<Vec<f64>>,
}

/// Cell masses `q_i ∝ q_θ(mid_i) · vol` on the grid of `template`, and
/// `∇q_i = q_i (∇log q_θ(mid_i) − Σ_j q_j ∇log q_θ(mid_j))`.
///
/// Fails when the unnormalized masses miss one by more than
/// [`QUADRATURE_TOLERANCE`] (box too small or cells too wide).
pub fn model_grid(
    family: &GeneratorFamily,
    theta: &[f64],
    template: &GridDensity,
) -> Result<ModelGrid> {
    family.check_theta(theta)?;
    if family.is_pushforward() {
        return Err(Error::invalid(format!(
            "{family:?} has no closed-form density"
        )));
    }
    let vol = template.cell_volume();
    let mut raw = Vec::with_capacity(template.len());
    let mut scores = Vec::with_capacity(template.len());
    for cell in 0..template.len() {
        let mid = template.midpoint(cell);
        raw.push(family.log_density(theta, &mid)?.exp() * vol);
        scores.push(family.grad_log_density(theta, &mid)?);
    }
    let total: f64 = raw.iter().sum();
    if !((total - 1.0).abs() <= QUADRATURE_TOLERANCE) {
        return Err(Error::GridTooCoarse { mass: total });
    }
    let masses: Vec<f64> = raw.iter().map(|r| r / total).collect();
    let mut mean_score = vec![0.0; theta.len()];
    for (q, s) in masses.iter().zip(&scores) {
        mean_score.iter_mut().zip(s).for_each(|(m, v)| *m += q * v);
    }
    let mass_gradients = masses
        .iter()
        .zip(&scores)
        .map(|(q, s)| {
            s.iter()
                .zip(&mean_score)
                .map(|(v, m)| q * (v - m))
                .collect()
        })
        .collect();
    let density = GridDensity::from_unnormalized(
        template.bounds().to_vec(),
        template.shape().to_vec(),
        masses,
    )?;
    Ok(ModelGrid {
        density,
        mass_gradients,
    })
}

fn contract(
    grads: &[Vec<f64>],
    weights: impl Iterator<Item = Option<f64>>,
    len: usize,
) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (g, w) in grads.iter().zip(weights) {
        if let Some(w) = w {
            out.iter_mut().zip(g).for_each(|(o, v)| *o += w * v);
        }
    }
    out
}

/// `JSD(p_r, q_θ)` and `Σ_i ∇q_i log(q_i / m_i)`, which is `2 ∇JSD`.
pub fn jsd_value_and_gradient(
    family: &GeneratorFamily,
    theta: &[f64],
    p_r: &GridDensity,
) -> Result<(f64, Vec<f64>)> {
    let model = model_grid(family, theta, p_r)?;
    let q = model.density.masses();
    let p = p_r.masses();
    // Cells with q_i = 0 have ∇q_i = 0 as well and contribute nothing.
    let weights = q
        .iter()
        .zip(p)
        .map(|(&qi, &pi)| (qi > 0.0).then(|| (qi / (0.5 * (pi + qi))).ln()));
    let grad = contract(&model.mass_gradients, weights, theta.len());
    Ok((jsd_unclamped(p, q), grad))
}

fn check_positive(p_r: &GridDensity) -> Result<()> {
    match p_r.masses().iter().position(|&m| m <= 0.0) {
        Some(cell) => Err(Error::ZeroDensity { cell }),
        None => Ok(()),
    }
}

/// `2 KL(q_m ‖ p_r)` and `Σ_i ∇q_i (1 + log(m_i / p_i))`.
///
/// `p_r` must be positive on every cell.
pub fn neg_log_d_value_and_gradient(
    family: &GeneratorFamily,
    theta: &[f64],
    p_r: &GridDensity,
) -> Result<(f64, Vec<f64>)> {
    check_positive(p_r)?;
    let model = model_grid(family, theta, p_r)?;
    let q = model.density.masses();
    let p = p_r.masses();
    let m: Vec<f64> = q.iter().zip(p).map(|(a, b)| 0.5 * (a + b)).collect();
    let weights = m.iter().zip(p).map(|(mi, pi)| Some(1.0 + (mi / pi).ln()));
    let grad = contract(&model.mass_gradients, weights, theta.len());
    Ok((2.0 * kl_masses(&m, p), grad))
}

fn model_masses(family: &GeneratorFamily, theta: &[f64], p_r: &GridDensity) -> Result<Vec<f64>> {
    Ok(model_grid(family, theta, p_r)?.density.masses().to_vec())
}

/// Density-family JSD gradient against `2 ×` central differences of the
/// grid JSD.
pub fn grad_jsd(
    family: &GeneratorFamily,
    theta: &[f64],
    p_r: &GridDensity,
) -> Result<GradientAudit> {
    let (_, formula) = jsd_value_and_gradient(family, theta, p_r)?;
    let oracle = finite_difference(
        |t| Ok(2.0 * jsd_unclamped(p_r.masses(), &model_masses(family, t, p_r)?)),
        theta,
        DEFAULT_H_REL,
    )?;
    Ok(GradientAudit::new(formula, oracle, DEFAULT_H_REL))
}

fn two_kl_mixture(q: &[f64], p: &[f64]) -> f64 {
    let m: Vec<f64> = q.iter().zip(p).map(|(a, b)| 0.5 * (a + b)).collect();
    2.0 * kl_masses(&m, p)
}

/// `−log D` gradient against central differences of `2 KL(q_m ‖ p_r)`.
pub fn grad_neg_log_d(
    family: &GeneratorFamily,
    theta: &[f64],
    p_r: &GridDensity,
) -> Result<GradientAudit> {
    let (_, formula) = neg_log_d_value_and_gradient(family, theta, p_r)?;
    let oracle = finite_difference(
        |t| Ok(two_kl_mixture(&model_masses(family, t, p_r)?, p_r.masses())),
        theta,
        DEFAULT_H_REL,
    )?;
    Ok(GradientAudit::new(formula, oracle, DEFAULT_H_REL))
}

/// Finite-difference gradients of `2 KL(q_m ‖ p_r)` and of
/// `KL(q_θ ‖ p_r) − 2 JSD(p_r, q_θ)`, which agree although the two
/// functions differ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub via_mixture_kl: Vec<f64>,
    pub via_kl_minus_jsd: Vec<f64>,
    pub max_rel_error: f64,
}

pub fn neg_log_d_identity(
    family: &GeneratorFamily,
    theta: &[f64],
    p_r: &GridDensity,
) -> Result<IdentityCheck> {
    check_positive(p_r)?;
    let p = p_r.masses();
    let via_mixture_kl = finite_difference(
        |t| Ok(two_kl_mixture(&model_masses(family, t, p_r)?, p)),
        theta,
        DEFAULT_H_REL,
    )?;
    let via_kl_minus_jsd = finite_difference(
        |t| {
            let q = model_masses(family, t, p_r)?;
            Ok(kl_masses(&q, p) - 2.0 * jsd_unclamped(p, &q))
        },
        theta,
        DEFAULT_H_REL,
    )?;
    let max_rel_error = relative_error(&via_kl_minus_jsd, &via_mixture_kl);
    Ok(IdentityCheck {
        via_mixture_kl,
        via_kl_minus_jsd,
        max_rel_error,
    })
}

/// Per-cell magnitudes of the two density-gradient weights:
/// `|1 + log(q_m / p_r)|` and `|log(q_θ / q_m)|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightFactors {
    pub neg_log_d: Vec<f64>,
    pub jsd: Vec<f64>,
}

pub fn weight_factors(q: &GridDensity, p_r: &GridDensity) -> Result<WeightFactors> {
    if !q.same_grid(p_r) {
        return Err(Error::GridMismatch);
    }
    let (mut neg_log_d, mut jsd) = (Vec::with_capacity(q.len()), Vec::with_capacity(q.len()));
    for (&qi, &pi) in q.masses().iter().zip(p_r.masses()) {
        let m = 0.5 * (qi + pi);
        neg_log_d.push(if pi > 0.0 {
            (1.0 + (m / pi).ln()).abs()
        } else {
            f64::INFINITY
        });
        jsd.push(if qi > 0.0 {
            (qi / m).ln().abs()
        } else {
            f64::INFINITY
        });
    }
    Ok(WeightFactors { neg_log_d, jsd })
}
