//! Generator and model-density families, the OT and density-based generator
//! gradients, and their finite-difference audits.
//!
//! OT gradients are taken at a fixed optimal coupling: when the plan is a
//! permutation `σ`, `W_p^p = Σ_i w_i c(x_i, G_θ(z_σ(i)))` and its gradient
//! sums `∂c/∂y · ∂G/∂θ` over matched pairs. The oracle re-solves the
//! transport problem at every perturbed θ.
//!
//! Density gradients work on grid masses `q_i` normalized by the
//! midpoint-rule total, so they are exact derivatives of the discrete
//! divergences the oracle differentiates.

mod density;
mod family;
mod fd;
mod ot;

pub use density::{
    grad_jsd, grad_neg_log_d, jsd_value_and_gradient, model_grid, neg_log_d_identity,
    neg_log_d_value_and_gradient, weight_factors, IdentityCheck, ModelGrid, WeightFactors,
    QUADRATURE_TOLERANCE,
};
pub use family::{pushforward, softplus, softplus_inverse, GeneratorFamily};
pub use fd::{finite_difference, relative_error, GradientAudit, DEFAULT_H_REL};
pub use ot::{grad_w1, grad_w2sq, w1_value_and_gradient, w2sq_value_and_gradient, TIE_TOLERANCE};
