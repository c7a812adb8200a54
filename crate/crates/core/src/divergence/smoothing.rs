use super::GridDensity;
use crate::error::{Error, Result};

/// Discrete Gaussian blur with standard deviation `sigma` (coordinate units).
///
/// Each cell spreads its mass over every cell of the same axis with weights
/// `exp(-Δ²/2σ²)` normalized per source cell, so no mass leaves the box and
/// the operation is a Markov kernel applied axis by axis. Output masses are
/// positive wherever the kernel does not underflow.
pub fn smooth(grid: &GridDensity, sigma: f64) -> Result<GridDensity> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid("smoothing sigma must be positive"));
    }
    let mut masses = grid.masses().to_vec();
    let shape = grid.shape().to_vec();
    for axis in 0..grid.dim() {
        let s = shape[axis];
        let h = grid.cell_width(axis);
        // kernel[from][to], each row sums to one.
        let kernel: Vec<Vec<f64>> = (0..s)
            .map(|from| {
                let row: Vec<f64> = (0..s)
                    .map(|to| {
                        let d = (to as f64 - from as f64) * h / sigma;
                        (-0.5 * d * d).exp()
                    })
                    .collect();
                let total: f64 = row.iter().sum();
                row.into_iter().map(|k| k / total).collect()
            })
            .collect();
        let stride: usize = shape[axis + 1..].iter().product();
        let outer: usize = shape[..axis].iter().product();
        let mut out = vec![0.0; masses.len()];
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * s * stride + inner;
                for (from, krow) in kernel.iter().enumerate() {
                    let m = masses[base + from * stride];
                    if m == 0.0 {
                        continue;
                    }
                    for (to, k) in krow.iter().enumerate() {
                        out[base + to * stride] += m * k;
                    }
                }
            }
        }
        masses = out;
    }
    GridDensity::from_unnormalized(grid.bounds().to_vec(), shape, masses)
}
