use ndarray::Array2;

use super::family::{pushforward, GeneratorFamily};
use super::fd::{finite_difference, GradientAudit, DEFAULT_H_REL};
use crate::error::{Error, Result};
use crate::transport::{
    cost_matrix, extract_map, solve_exact, transport_cost, EmpiricalDistribution, Ground, Method,
};

/// Coordinate differences at or below this are treated as ties.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Generated cloud and the optimal assignment `σ` from `P_r` onto it.
fn matched(
    p_r: &EmpiricalDistribution,
    family: &GeneratorFamily,
    theta: &[f64],
    latents: &Array2<f64>,
    ground: Ground,
    p: u32,
) -> Result<(EmpiricalDistribution, Vec<usize>, f64)> {
    let q = pushforward(family, theta, latents)?;
    if p_r.len() != q.len() || !p_r.is_uniform() {
        return Err(Error::NonPermutationPlan(format!(
            "needs a uniform target and as many latents as target atoms (got {} and {})",
            p_r.len(),
            q.len()
        )));
    }
    let cost = cost_matrix(p_r, &q, ground, p)?;
    let (coupling, value) = solve_exact(p_r, &q, &cost)?;
    let map = extract_map(&coupling, p_r, &q)?;
    let sigma = map
        .assignment
        .filter(|_| map.is_permutation)
        .ok_or_else(|| {
            Error::NonPermutationPlan("optimal plan splits mass between atoms".into())
        })?;
    Ok((q, sigma, value))
}

/// `W_2²` and its fixed-coupling gradient
/// `Σ_i w_i · 2 (G(z_σ(i)) − x_i)ᵀ ∂G(z_σ(i))/∂θ`.
pub fn w2sq_value_and_gradient(
    p_r: &EmpiricalDistribution,
    family: &GeneratorFamily,
    theta: &[f64],
    latents: &Array2<f64>,
) -> Result<(f64, Vec<f64>)> {
    let (q, sigma, value) = matched(p_r, family, theta, latents, Ground::Euclidean, 2)?;
    let mut grad = vec![0.0; theta.len()];
    for (i, &j) in sigma.iter().enumerate() {
        let w = p_r.weights()[i];
        let z = latents.row(j).to_vec();
        let jac = family.jacobian(theta, &z);
        for (r, (g, x)) in q.point(j).iter().zip(p_r.point(i).iter()).enumerate() {
            let coeff = 2.0 * w * (g - x);
            for (c, gc) in grad.iter_mut().enumerate() {
                *gc += coeff * jac[[r, c]];
            }
        }
    }
    Ok((value, grad))
}

/// `W_1` and its fixed-coupling gradient. Per-pair weights are the sign
/// vector of `G(z_σ(i)) − x_i` for the l1 ground cost and its unit vector
/// for the euclidean one. Ties (a zero coordinate, resp. a zero difference)
/// make the subgradient ambiguous and are rejected.
pub fn w1_value_and_gradient(
    p_r: &EmpiricalDistribution,
    family: &GeneratorFamily,
    theta: &[f64],
    latents: &Array2<f64>,
    ground: Ground,
) -> Result<(f64, Vec<f64>)> {
    let (q, sigma, value) = matched(p_r, family, theta, latents, ground, 1)?;
    let mut grad = vec![0.0; theta.len()];
    for (i, &j) in sigma.iter().enumerate() {
        let diff: Vec<f64> = q
            .point(j)
            .iter()
            .zip(p_r.point(i).iter())
            .map(|(g, x)| g - x)
            .collect();
        let scale = diff.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let direction: Vec<f64> = match ground {
            Ground::L1 => {
                if let Some(c) = diff.iter().position(|v| v.abs() <= TIE_TOLERANCE * scale) {
                    return Err(Error::SubgradientTie {
                        source_index: i,
                        target_index: j,
                        coordinate: Some(c),
                    });
                }
                diff.iter().map(|v| v.signum()).collect()
            }
            Ground::Euclidean => {
                let len = diff.iter().map(|v| v * v).sum::<f64>().sqrt();
                if len <= TIE_TOLERANCE * scale {
                    return Err(Error::SubgradientTie {
                        source_index: i,
                        target_index: j,
                        coordinate: None,
                    });
                }
                diff.iter().map(|v| v / len).collect()
            }
        };
        let w = p_r.weights()[i];
        let jac = family.jacobian(theta, &latents.row(j).to_vec());
        for (r, d) in direction.iter().enumerate() {
            for (c, gc) in grad.iter_mut().enumerate() {
                *gc += w * d * jac[[r, c]];
            }
        }
    }
    Ok((value, grad))
}

fn ot_oracle(
    p_r: &EmpiricalDistribution,
    family: &GeneratorFamily,
    theta: &[f64],
    latents: &Array2<f64>,
    ground: Ground,
    p: u32,
    h_rel: f64,
) -> Result<Vec<f64>> {
    finite_difference(
        |t| {
            let q = pushforward(family, t, latents)?;
            transport_cost(p_r, &q, p, ground, Method::Exact)
        },
        theta,
        h_rel,
    )
}

/// Fixed-coupling gradient of `W_2²(P_r, G_θ#latents)` against central
/// differences through full re-solves.
pub fn grad_w2sq(
    p_r: &EmpiricalDistribution,
    family: &GeneratorFamily,
    theta: &[f64],
    latents: &Array2<f64>,
) -> Result<GradientAudit> {
    let (_, formula) = w2sq_value_and_gradient(p_r, family, theta, latents)?;
    let oracle = ot_oracle(
        p_r,
        family,
        theta,
        latents,
        Ground::Euclidean,
        2,
        DEFAULT_H_REL,
    )?;
    Ok(GradientAudit::new(formula, oracle, DEFAULT_H_REL))
}

/// Fixed-coupling gradient of `W_1(P_r, G_θ#latents)` against central
/// differences through full re-solves.
pub fn grad_w1(
    p_r: &EmpiricalDistribution,
    family: &GeneratorFamily,
    theta: &[f64],
    latents: &Array2<f64>,
    ground: Ground,
) -> Result<GradientAudit> {
    let (_, formula) = w1_value_and_gradient(p_r, family, theta, latents, ground)?;
    let oracle = ot_oracle(p_r, family, theta, latents, ground, 1, DEFAULT_H_REL)?;
    Ok(GradientAudit::new(formula, oracle, DEFAULT_H_REL))
}
