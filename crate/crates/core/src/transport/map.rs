use ndarray::Array2;

use super::{Coupling, EmpiricalDistribution};
use crate::error::{Error, Result};

/// Monge-style map recovered from a plan by barycentric projection.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportMap {
    /// Row `i` is `T(x_i)`.
    pub images: Array2<f64>,
    /// Each source row sends all its mass to one target and each target
    /// receives from exactly one source.
    pub is_permutation: bool,
    /// `assignment[i] = σ(i)` when the plan is a permutation.
    pub assignment: Option<Vec<usize>>,
}

/// `T(x_i) = Σ_j γ_ij y_j / w_i`.
pub fn extract_map(
    coupling: &Coupling,
    source: &EmpiricalDistribution,
    target: &EmpiricalDistribution,
) -> Result<TransportMap> {
    if coupling.n_source() != source.len() || coupling.n_target() != target.len() {
        return Err(Error::invalid("coupling does not match the distributions"));
    }
    let (n, m, d) = (source.len(), target.len(), target.dim());
    let weights = source.weights();
    let mut images = Array2::zeros((n, d));
    let mut row_cells = vec![0usize; n];
    let mut col_cells = vec![0usize; m];
    let mut assignment = vec![usize::MAX; n];
    for &(i, j, mass) in coupling.entries() {
        let mut row = images.row_mut(i);
        row.scaled_add(mass, &target.point(j));
        // Cells far below the row mass are rounding debris, not routing.
        if mass > 1e-12 * weights[i] {
            row_cells[i] += 1;
            col_cells[j] += 1;
            assignment[i] = j;
        }
    }
    for (i, mut row) in images.rows_mut().into_iter().enumerate() {
        let w = weights[i];
        if w <= 0.0 {
            return Err(Error::ZeroWeightRow(i));
        }
        row /= w;
    }
    let is_permutation =
        n == m && row_cells.iter().all(|&c| c == 1) && col_cells.iter().all(|&c| c == 1);
    Ok(TransportMap {
        images,
        is_permutation,
        assignment: is_permutation.then_some(assignment),
    })
}
