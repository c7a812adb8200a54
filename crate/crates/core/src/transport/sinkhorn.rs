use ndarray::{Array1, Array2};

use super::{check_sizes, Coupling, EmpiricalDistribution};
use crate::error::{Error, Result};

/// Output of [`solve_sinkhorn`].
#[derive(Debug, Clone)]
pub struct SinkhornResult {
    /// Plan after rounding onto the exact marginal polytope.
    pub coupling: Coupling,
    /// Transport cost `Σ γ_ij C_ij` of `coupling` (no entropy term).
    pub value: f64,
    pub iterations: usize,
    /// Row-marginal residual of the unrounded scaling iterate.
    pub residual: f64,
    pub converged: bool,
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Entropic transport by log-domain Sinkhorn scaling.
///
/// The final iterate is rounded onto `Π(P, Q)` (row scale-down, column
/// scale-down, rank-one fix of the remaining mass) so the reported value is
/// the cost of a feasible plan and therefore never below the exact optimum.
/// Non-convergence is reported in the result, not hidden.
pub fn solve_sinkhorn(
    source: &EmpiricalDistribution,
    target: &EmpiricalDistribution,
    cost: &Array2<f64>,
    epsilon: f64,
    max_iter: usize,
    tol: f64,
) -> Result<SinkhornResult> {
    check_sizes(source, target, cost)?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid("epsilon must be positive"));
    }
    let a = source.weights();
    let b = target.weights();
    let (n, m) = cost.dim();
    let log_a: Vec<f64> = a.iter().map(|w| w.ln()).collect();
    let log_b: Vec<f64> = b.iter().map(|w| w.ln()).collect();
    let mut f = Array1::<f64>::zeros(n);
    let mut g = Array1::<f64>::zeros(m);

    let plan_of = |f: &Array1<f64>, g: &Array1<f64>| {
        Array2::from_shape_fn((n, m), |(i, j)| {
            ((f[i] + g[j] - cost[[i, j]]) / epsilon).exp()
        })
    };

    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    while iterations < max_iter {
        iterations += 1;
        for i in 0..n {
            let lse = log_sum_exp((0..m).map(|j| (g[j] - cost[[i, j]]) / epsilon));
            f[i] = epsilon * (log_a[i] - lse);
        }
        for j in 0..m {
            let lse = log_sum_exp((0..n).map(|i| (f[i] - cost[[i, j]]) / epsilon));
            g[j] = epsilon * (log_b[j] - lse);
        }
        if iterations % 10 == 0 || iterations == max_iter {
            let plan = plan_of(&f, &g);
            residual = plan
                .rows()
                .into_iter()
                .zip(a.iter())
                .map(|(row, w)| (row.sum() - w).abs())
                .fold(0.0, f64::max);
            if residual <= tol {
                break;
            }
        }
    }

    let plan = round_to_marginals(plan_of(&f, &g), a, b);
    let coupling = Coupling::from_dense(&plan);
    let value = coupling.cost(cost);
    Ok(SinkhornResult {
        coupling,
        value,
        iterations,
        residual,
        converged: residual <= tol,
    })
}

/// Projects a nonnegative matrix onto the transport polytope.
fn round_to_marginals(mut plan: Array2<f64>, a: &Array1<f64>, b: &Array1<f64>) -> Array2<f64> {
    for (mut row, &w) in plan.rows_mut().into_iter().zip(a.iter()) {
        let s = row.sum();
        if s > w {
            row *= w / s;
        }
    }
    for (mut col, &w) in plan.columns_mut().into_iter().zip(b.iter()) {
        let s = col.sum();
        if s > w {
            col *= w / s;
        }
    }
    let row_deficit: Array1<f64> = a - &plan.sum_axis(ndarray::Axis(1));
    let col_deficit: Array1<f64> = b - &plan.sum_axis(ndarray::Axis(0));
    let missing = row_deficit.sum();
    if missing > 0.0 {
        for ((i, j), v) in plan.indexed_iter_mut() {
            *v += row_deficit[i].max(0.0) * col_deficit[j].max(0.0) / missing;
        }
    }
    plan
}
