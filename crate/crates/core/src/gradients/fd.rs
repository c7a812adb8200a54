use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative finite-difference step.
pub const DEFAULT_H_REL: f64 = 1e-5;

/// An analytic gradient next to its finite-difference oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientAudit {
    pub formula_gradient: Vec<f64>,
    pub oracle_gradient: Vec<f64>,
    /// `max |formula − oracle| / max(‖oracle‖∞, 1e-8)`.
    pub max_rel_error: f64,
    /// Relative step used by the oracle.
    pub h: f64,
}

impl GradientAudit {
    pub fn new(formula_gradient: Vec<f64>, oracle_gradient: Vec<f64>, h: f64) -> Self {
        let max_rel_error = relative_error(&formula_gradient, &oracle_gradient);
        Self {
            formula_gradient,
            oracle_gradient,
            max_rel_error,
            h,
        }
    }
}

/// `max |a − b| / max(‖b‖∞, 1e-8)`.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-8);
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        / scale
}

/// Central differences with per-coordinate step `h_rel · max(|θ_c|, 1)`.
pub fn finite_difference(
    mut loss: impl FnMut(&[f64]) -> Result<f64>,
    theta: &[f64],
    h_rel: f64,
) -> Result<Vec<f64>> {
    if !(h_rel > 0.0 && h_rel.is_finite()) {
        return Err(Error::invalid("finite-difference step must be positive"));
    }
    let mut probe = theta.to_vec();
    let mut grad = Vec::with_capacity(theta.len());
    for c in 0..theta.len() {
        let h = h_rel * theta[c].abs().max(1.0);
        probe[c] = theta[c] + h;
        let up = loss(&probe)?;
        probe[c] = theta[c] - h;
        let down = loss(&probe)?;
        probe[c] = theta[c];
        if !(up.is_finite() && down.is_finite()) {
            return Err(Error::NonFinite(format!(
                "loss near theta[{c}] ({up}, {down})"
            )));
        }
        grad.push((up - down) / (2.0 * h));
    }
    Ok(grad)
}
