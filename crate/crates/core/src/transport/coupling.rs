use ndarray::{Array1, Array2};

/// A transport plan stored as its nonzero cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    n_source: usize,
    n_target: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Coupling {
    /// Entries are sorted by (source, target); zero cells are dropped.
    pub fn from_entries(
        n_source: usize,
        n_target: usize,
        mut entries: Vec<(usize, usize, f64)>,
    ) -> Self {
        entries.retain(|&(_, _, mass)| mass > 0.0);
        entries.sort_by_key(|e| (e.0, e.1));
        Self {
            n_source,
            n_target,
            entries,
        }
    }

    pub fn from_dense(plan: &Array2<f64>) -> Self {
        let entries = plan
            .indexed_iter()
            .filter(|(_, &m)| m > 0.0)
            .map(|((i, j), &m)| (i, j, m))
            .collect();
        Self::from_entries(plan.nrows(), plan.ncols(), entries)
    }

    pub fn n_source(&self) -> usize {
        self.n_source
    }

    pub fn n_target(&self) -> usize {
        self.n_target
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut plan = Array2::zeros((self.n_source, self.n_target));
        for &(i, j, m) in &self.entries {
            plan[[i, j]] += m;
        }
        plan
    }

    pub fn row_sums(&self) -> Array1<f64> {
        let mut sums = Array1::zeros(self.n_source);
        for &(i, _, m) in &self.entries {
            sums[i] += m;
        }
        sums
    }

    pub fn col_sums(&self) -> Array1<f64> {
        let mut sums = Array1::zeros(self.n_target);
        for &(_, j, m) in &self.entries {
            sums[j] += m;
        }
        sums
    }

    /// Largest absolute deviation of the (row, column) marginals.
    pub fn marginal_residuals(&self, source: &Array1<f64>, target: &Array1<f64>) -> (f64, f64) {
        let max_dev = |sums: Array1<f64>, w: &Array1<f64>| {
            sums.iter()
                .zip(w.iter())
                .map(|(s, w)| (s - w).abs())
                .fold(0.0, f64::max)
        };
        (
            max_dev(self.row_sums(), source),
            max_dev(self.col_sums(), target),
        )
    }

    /// `Σ γ_ij C_ij`.
    pub fn cost(&self, cost: &Array2<f64>) -> f64 {
        self.entries.iter().map(|&(i, j, m)| m * cost[[i, j]]).sum()
    }
}
