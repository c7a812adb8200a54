use super::GridDensity;
use crate::error::Result;

/// `KL(p‖q) = Σ p_i log(p_i / q_i)`, natural log.
///
/// Uses `0 log 0 = 0` and returns `+∞` when `p_i > 0` meets `q_i = 0`.
pub fn kl(p: &GridDensity, q: &GridDensity) -> Result<f64> {
    p.check_same(q)?;
    Ok(kl_masses(p.masses(), q.masses()))
}

pub(crate) fn kl_masses(p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return f64::INFINITY;
        }
        total += pi * (pi / qi).ln();
    }
    total.max(0.0)
}

/// `½ KL(p‖m) + ½ KL(q‖m)` with `m = ½(p + q)`.
///
/// Always finite, in `[0, log 2]`, and exactly symmetric: each cell's
/// contribution is computed from a commutative expression.
pub fn jsd(p: &GridDensity, q: &GridDensity) -> Result<f64> {
    p.check_same(q)?;
    Ok(jsd_masses(p.masses(), q.masses()))
}

pub(crate) fn jsd_masses(p: &[f64], q: &[f64]) -> f64 {
    jsd_unclamped(p, q).clamp(0.0, std::f64::consts::LN_2)
}

/// The JSD sum before clamping away rounding excursions, for differencing.
pub(crate) fn jsd_unclamped(p: &[f64], q: &[f64]) -> f64 {
    let term = |a: f64, m: f64| if a > 0.0 { a * (a / m).ln() } else { 0.0 };
    let mut total = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        let m = 0.5 * (pi + qi);
        total += term(pi, m) + term(qi, m);
    }
    0.5 * total
}

/// Per-cell optimal discriminator `p_r / (p_r + q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminatorField {
    pub values: Vec<f64>,
}

/// `D*(x) = p_r / (p_r + q)` cell by cell, with `0/0 = ½`.
pub fn optimal_discriminator(p_r: &GridDensity, q: &GridDensity) -> Result<DiscriminatorField> {
    p_r.check_same(q)?;
    let values = p_r
        .masses()
        .iter()
        .zip(q.masses())
        .map(|(&p, &q)| if p + q == 0.0 { 0.5 } else { p / (p + q) })
        .collect();
    Ok(DiscriminatorField { values })
}
